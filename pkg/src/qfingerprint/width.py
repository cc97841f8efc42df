"""Row/column widths of referee-matrix families and bounds on row-column width.

Upper bounds come from explicit factorizations ``D_l = E_l @ F_l`` (each one a
checkable certificate); the lower bound is ``trace_norm(D) / M``, which holds
for every factorization of a single ``M x M`` matrix.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import linalg as la
from .errors import ConsistencyError, DecompositionMismatch, InvalidConfig, NotSquare
from .zoo import MAX_IP_BITS, ip_matrix, ip_signed_matrix

log = logging.getLogger(__name__)

RECONSTRUCTION_TOL = 1e-8
BOUND_SLACK = 1e-6
BALANCE_ITERS = 50
TIE_RTOL = 1e-12


def as_family(family) -> np.ndarray:
    """Stack a matrix or a sequence of matrices into an ``(L, M, M)`` float array."""
    if isinstance(family, np.ndarray) and family.ndim == 2:
        family = [family]
    stack = np.array([np.asarray(D, dtype=np.float64) for D in family])
    if stack.ndim != 3 or stack.shape[0] == 0:
        raise DecompositionMismatch("family must be a nonempty list of matrices")
    if stack.shape[1] != stack.shape[2]:
        raise NotSquare(f"family matrices must be square, got {stack.shape[1:]}")
    return stack


def _rn(E: np.ndarray) -> np.ndarray:
    """Row norm of each member of a stacked ``(L, rows, cols)`` array."""
    return np.sqrt((E * E).sum(axis=2).max(axis=1))


def _cn(F: np.ndarray) -> np.ndarray:
    return np.sqrt((F * F).sum(axis=1).max(axis=1))


class Decomposition:
    """Factor pairs ``(E_l, F_l)`` with ``E_l @ F_l == D_l`` for each coin value.

    Reconstruction is checked on construction. ``rw`` and ``cw`` are the
    root-mean-square over ``l`` of ``rn(E_l)`` and ``cn(F_l)``.
    """

    def __init__(self, family, E, F, method: str = "", tol: float = RECONSTRUCTION_TOL):
        D = as_family(family)
        E = np.array(E, dtype=np.float64)
        F = np.array(F, dtype=np.float64)
        if E.ndim == 2:
            E = E[None]
        if F.ndim == 2:
            F = F[None]
        L, M, _ = D.shape
        if E.shape[0] != L or F.shape[0] != L:
            raise DecompositionMismatch(f"need {L} factor pairs, got {E.shape[0]} and {F.shape[0]}")
        K = E.shape[2]
        if E.shape[1] != M or F.shape[1:] != (K, M):
            raise DecompositionMismatch(
                f"factors must be {M}x{K} and {K}x{M}, got {E.shape[1:]} and {F.shape[1:]}"
            )
        if K > M * M:
            raise DecompositionMismatch(f"inner dimension {K} exceeds M^2 = {M * M}")
        err = float(np.abs(E @ F - D).max())
        if err > tol:
            raise DecompositionMismatch(f"reconstruction error {err:.3g} exceeds {tol:g}")
        for a in (D, E, F):
            a.setflags(write=False)
        self.family, self.E, self.F = D, E, F
        self.method = method
        self.reconstruction_error = err
        self.rw = float(np.sqrt(np.mean(_rn(E) ** 2)))
        self.cw = float(np.sqrt(np.mean(_cn(F) ** 2)))
        self.rcw = self.rw * self.cw

    @property
    def L(self) -> int:
        return self.family.shape[0]

    @property
    def M(self) -> int:
        return self.family.shape[1]

    @property
    def K(self) -> int:
        return self.E.shape[2]

    def __repr__(self):
        return (
            f"Decomposition(method={self.method!r}, L={self.L}, M={self.M}, K={self.K}, "
            f"rw={self.rw:.6g}, cw={self.cw:.6g}, rcw={self.rcw:.6g})"
        )


def decomposition_widths(d: Decomposition) -> tuple[float, float, float]:
    return d.rw, d.cw, d.rcw


def trivial_decomposition(family) -> Decomposition:
    """``D_l = I @ D_l``."""
    D = as_family(family)
    L, M, _ = D.shape
    E = np.broadcast_to(np.eye(M), (L, M, M))
    return Decomposition(D, E, D, method="trivial")


def svd_decomposition(family) -> Decomposition:
    """``E_l = U sqrt(S)``, ``F_l = sqrt(S) V^T`` from the SVD of each ``D_l``."""
    D = as_family(family)
    Es, Fs = [], []
    for Dl in D:
        U, s, Vt = la.svd(Dl)
        r = np.sqrt(s)
        Es.append(U * r)
        Fs.append(r[:, None] * Vt)
    return Decomposition(D, Es, Fs, method="svd")


def balance_decomposition(
    d: Decomposition, iters: int = BALANCE_ITERS, history: list | None = None
) -> Decomposition:
    """Diagonal rescaling ``(E S)(S^-1 F)`` that tries to lower rcw.

    Each iteration equalizes, per inner index ``k``, the mass of column ``k``
    of ``E_l`` against row ``k`` of ``F_l`` (alternating the 2-norm and the
    max-norm as mass), then rescales each coin's pair by a scalar so that
    ``rn(E_l) == cn(F_l)``, which is optimal for that scalar freedom.
    The best iterate seen is returned, so rcw never increases. Not optimal
    overall.
    """
    E = d.E.copy()
    F = d.F.copy()
    best = (d.rcw, d.E, d.F)
    if history is not None:
        history.append(d.rcw)
    for it in range(iters):
        order = 2 if it % 2 == 0 else np.inf
        e = np.linalg.norm(E, ord=order, axis=1)  # (L, K): column masses of E_l
        f = np.linalg.norm(F, ord=order, axis=2)  # (L, K): row masses of F_l
        live = (e > 0) & (f > 0)
        s = np.ones_like(e)
        s[live] = np.clip(np.sqrt(f[live] / e[live]), 1e-6, 1e6)
        E = E * s[:, None, :]
        F = F / s[:, :, None]

        r, c = _rn(E), _cn(F)
        both = (r > 0) & (c > 0)
        scale = np.ones_like(r)
        scale[both] = np.sqrt(c[both] / r[both])
        E = E * scale[:, None, None]
        F = F / scale[:, None, None]

        rcw = float(np.sqrt(np.mean(_rn(E) ** 2)) * np.sqrt(np.mean(_cn(F) ** 2)))
        # ties go to the later, better balanced iterate
        if rcw <= best[0] * (1 + TIE_RTOL):
            best = (min(rcw, best[0]), E.copy(), F.copy())
        if history is not None:
            history.append(best[0])
        if np.allclose(s, 1.0, atol=1e-13) and np.allclose(scale, 1.0, atol=1e-13) and it:
            break
    if best[1] is d.E:
        return Decomposition(d.family, d.E, d.F, method=d.method)
    return Decomposition(d.family, best[1], best[2], method=f"{d.method}+balance")


# -- convex width ------------------------------------------------------------


@dataclass
class ConvwDecomposition:
    """Terms ``(G_j, P_j)`` with ``sum_j G_j @ P_j == D``."""

    G: list[np.ndarray]
    P: list[np.ndarray]

    @property
    def W(self) -> int:
        return len(self.G)


@dataclass(frozen=True)
class ConvwValidation:
    ok: bool
    reason: str | None = None
    term: int | None = None
    detail: str = ""

    def __bool__(self):
        return self.ok


def cyclic_shift(M: int, j: int) -> np.ndarray:
    """Permutation matrix with ``P[a, (a + j) % M] = 1``."""
    return np.roll(np.eye(M, dtype=np.uint8), j, axis=1)


def cyclic_diagonal_decomposition(D) -> ConvwDecomposition:
    """Split ``D`` along its M cyclic diagonals, each a diagonal matrix times a shift.

    Term ``j`` keeps the entries with ``b - a == j (mod M)``; its ``G_j`` is
    ``diag(D[a, (a + j) % M])``.
    """
    D = np.asarray(D)
    M = la.require_square(D)
    a = np.arange(M)
    G = [np.diag(D[a, (a + j) % M].astype(np.float64)) for j in range(M)]
    P = [cyclic_shift(M, j) for j in range(M)]
    return ConvwDecomposition(G, P)


def validate_convw(
    D,
    cd: ConvwDecomposition,
    symmetry_tol: float = la.SYMMETRY_TOL,
    psd_tol: float = la.PSD_TOL,
    nonneg_tol: float = 1e-12,
    tol: float = RECONSTRUCTION_TOL,
) -> ConvwValidation:
    """Check every condition on a convex-width decomposition; report the first failure."""
    D = np.asarray(D, dtype=np.float64)
    M = la.require_square(D)
    if len(cd.G) != len(cd.P):
        return ConvwValidation(False, "ShapeMismatch", None, "G and P lists differ in length")
    for j, (G, P) in enumerate(zip(cd.G, cd.P)):
        G = np.asarray(G, dtype=np.float64)
        P = np.asarray(P)
        if G.shape != (M, M) or P.shape != (M, M):
            return ConvwValidation(False, "ShapeMismatch", j, f"term shapes {G.shape}, {P.shape}")
        if not (
            np.all((P == 0) | (P == 1))
            and np.all(P.sum(axis=0) == 1)
            and np.all(P.sum(axis=1) == 1)
        ):
            return ConvwValidation(False, "NotPermutation", j)
        asym = float(np.abs(G - G.T).max())
        if asym > symmetry_tol:
            return ConvwValidation(False, "NotSymmetric", j, f"asymmetry {asym:.3g}")
        lam = float(np.linalg.eigvalsh((G + G.T) / 2)[0])
        if lam < -psd_tol:
            return ConvwValidation(False, "NotPSD", j, f"eigenvalue {lam:.3g}")
        if G.min() < -nonneg_tol:
            return ConvwValidation(False, "NonNegativity", j, f"entry {G.min():.3g}")
    total = sum((np.asarray(G, dtype=np.float64) @ P for G, P in zip(cd.G, cd.P)), np.zeros((M, M)))
    err = float(np.abs(total - D).max())
    if err > tol:
        return ConvwValidation(False, "Reconstruction", None, f"error {err:.3g}")
    return ConvwValidation(True)


def convw_to_rcw(D, cd: ConvwDecomposition) -> Decomposition:
    """Turn ``sum_j G_j P_j`` into one factorization ``E @ F`` with inner dimension ``M W``.

    With ``G_j = T_j^T T_j``: ``E = [T_1^T | ... | T_W^T]`` and ``F`` stacks
    ``T_j P_j`` vertically.
    """
    check = validate_convw(D, cd)
    if not check:
        raise DecompositionMismatch(f"invalid convex-width decomposition: {check.reason} {check.detail}")
    T = [la.psd_sqrt(G) for G in cd.G]
    E = np.hstack([Tj.T for Tj in T])
    F = np.vstack([Tj @ np.asarray(P, dtype=np.float64) for Tj, P in zip(T, cd.P)])
    return Decomposition(np.asarray(D, dtype=np.float64), E, F, method="cyclic")


# -- lower bounds ------------------------------------------------------------


def rcw_lower_bound(D) -> float:
    """``trace_norm(D) / M``; no factorization of ``D`` has smaller rcw."""
    D = la.as_real_matrix(D)
    M = la.require_square(D)
    return la.trace_norm(D) / M


def holder_chain(d: Decomposition) -> tuple[float, float, float]:
    """``(trace_norm(D), frob(E) frob(F), M rn(E) cn(F))`` for a single-matrix decomposition.

    The three values are non-decreasing for any valid factorization.
    """
    if d.L != 1:
        raise DecompositionMismatch("holder_chain needs a single-matrix decomposition")
    D, E, F = d.family[0], d.E[0], d.F[0]
    return (
        la.trace_norm(D),
        la.frobenius(E) * la.frobenius(F),
        d.M * la.row_norm(E) * la.column_norm(F),
    )


@dataclass(frozen=True)
class Fact1Report:
    n: int
    M: int
    signed_square_is_scaled_identity: bool
    trace_norm_signed: float
    trace_norm_ip: float
    trace_norm_ip_floor: float
    rcw_lower_bound: float
    sqrt_bound: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def ip_lower_bound_check(n: int) -> Fact1Report:
    """Trace-norm lower bound on rcw for the inner-product matrix on n bits.

    Checks ``S @ S == M I`` in integer arithmetic for ``S = 2D - J``, then
    ``trace_norm(S) = M^1.5`` and ``trace_norm(D) >= (M^1.5 - M) / 2``, which
    gives ``rcw(D) >= (sqrt(M) - 1) / 2``.
    """
    if not 1 <= n <= MAX_IP_BITS:
        raise InvalidConfig(f"n must be in 1..{MAX_IP_BITS}, got {n}")
    M = 2**n
    D = ip_matrix(n)
    S = ip_signed_matrix(n)
    square_ok = bool(np.array_equal(S @ S, M * np.eye(M, dtype=np.int64)))
    if not square_ok:
        raise ConsistencyError("signed inner-product matrix does not square to M I")
    tn_signed = la.trace_norm(S)
    if abs(tn_signed - M**1.5) > 1e-6 * M**1.5:
        raise ConsistencyError(f"trace norm of signed matrix {tn_signed} != M^1.5")
    tn = la.trace_norm(D)
    floor = (M**1.5 - M) / 2
    if tn < floor - 1e-6:
        raise ConsistencyError(f"trace norm {tn} below the triangle-inequality floor {floor}")
    return Fact1Report(
        n=n,
        M=M,
        signed_square_is_scaled_identity=square_ok,
        trace_norm_signed=tn_signed,
        trace_norm_ip=tn,
        trace_norm_ip_floor=floor,
        rcw_lower_bound=tn / M,
        sqrt_bound=(math.sqrt(M) - 1) / 2,
    )


# -- report ------------------------------------------------------------------


@dataclass
class WidthReport:
    M: int
    L: int
    bounds: dict[str, float]
    certificates: dict[str, Decomposition] = field(repr=False)
    best_rcw_upper: float
    best_method: str
    sqrt_M_bound: float
    column_norm_bound: float
    operator_norm_bound: float
    rank: int | None = None
    lower_bound_trace: float | None = None
    rank_observation_holds: bool | None = None

    def to_dict(self, certificate_refs: dict | None = None) -> dict:
        return {
            "M": self.M,
            "L": self.L,
            "rank": self.rank,
            "bounds": dict(self.bounds),
            "best_method": self.best_method,
            "best_rcw_upper": self.best_rcw_upper,
            "lower_bound_trace": self.lower_bound_trace,
            "analytic_bounds": {
                "sqrt_M": self.sqrt_M_bound,
                "column_norm": self.column_norm_bound,
                "operator_norm": self.operator_norm_bound,
            },
            "rank_observation_holds": self.rank_observation_holds,
            "certificates": certificate_refs,
        }

    def to_json(self, certificate_refs: dict | None = None) -> str:
        return json.dumps(self.to_dict(certificate_refs), indent=2, sort_keys=True)

    def save_certificates(self, directory) -> dict:
        """Write each certificate's factors in matrix text format; return name -> files."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        refs = {}
        for name, d in sorted(self.certificates.items()):
            stem = name.replace("+", "_")
            files = []
            for l in range(d.L):
                for tag, A in (("E", d.E[l]), ("F", d.F[l])):
                    path = directory / f"{stem}_{tag}{l}.mat"
                    la.save_matrix(path, A, comment=f"{name}: {tag}_{l}, rcw={d.rcw!r}")
                    files.append(str(path))
            refs[name] = files
        return refs


def width_report(family, balance_iters: int = BALANCE_ITERS) -> WidthReport:
    """Run every decomposition generator and collect upper and lower bounds on rcw.

    Raises :class:`ConsistencyError` if the trace-norm lower bound exceeds the
    best certified upper bound.
    """
    D = as_family(family)
    L, M, _ = D.shape
    certs = [trivial_decomposition(D), svd_decomposition(D)]
    if L == 1:
        certs.append(convw_to_rcw(D[0], cyclic_diagonal_decomposition(D[0])))
    certs += [balance_decomposition(d, balance_iters) for d in list(certs)]
    certificates = {}
    for d in certs:
        name = d.method if d.method not in certificates else f"{d.method}+balance"
        certificates[name] = d
    bounds = {name: d.rcw for name, d in sorted(certificates.items())}
    best_method = min(bounds, key=lambda k: (bounds[k], k))
    best = bounds[best_method]

    report = WidthReport(
        M=M,
        L=L,
        bounds=bounds,
        certificates=certificates,
        best_rcw_upper=best,
        best_method=best_method,
        sqrt_M_bound=math.sqrt(M),
        column_norm_bound=max(la.column_norm(Dl) for Dl in D),
        operator_norm_bound=max(la.operator_norm(Dl) for Dl in D),
    )
    if L == 1:
        report.rank = la.numeric_rank(D[0])
        report.lower_bound_trace = rcw_lower_bound(D[0])
        report.rank_observation_holds = best <= report.rank + BOUND_SLACK
        if not report.rank_observation_holds:
            log.warning("best rcw %.6g exceeds rank %d", best, report.rank)
        if report.lower_bound_trace > best + BOUND_SLACK:
            raise ConsistencyError(
                f"lower bound {report.lower_bound_trace} exceeds upper bound {best}"
            )
    return report
