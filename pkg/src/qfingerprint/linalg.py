"""Dense real linear algebra used throughout the package.

Matrices are plain ``numpy.ndarray`` objects (float64 for real matrices,
uint8 for boolean ones). The SVD is a one-sided (Hestenes) Jacobi
iteration whose rotation loop lives in :mod:`qfingerprint.kernels`.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import kernels
from .errors import (
    ConvergenceFailure,
    DimensionMismatch,
    MatrixFormatError,
    NotPSD,
    NotSquare,
    NotSymmetric,
)

SVD_TOL = 1e-12
SVD_MAX_SWEEPS = 100
RANK_TOL = 1e-9
SYMMETRY_TOL = 1e-9
PSD_TOL = 1e-9


def as_real_matrix(A) -> np.ndarray:
    """Coerce to a 2-D finite float64 array, rejecting empty input."""
    M = np.array(A, dtype=np.float64, copy=True)
    if M.ndim == 1:
        M = M.reshape(1, -1)
    if M.ndim != 2 or M.size == 0:
        raise DimensionMismatch(f"expected a nonempty 2-D matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise MatrixFormatError("matrix has non-finite entries")
    return M


def as_boolean_matrix(A) -> np.ndarray:
    M = np.asarray(A)
    if M.ndim != 2 or M.size == 0:
        raise DimensionMismatch(f"expected a nonempty 2-D matrix, got shape {M.shape}")
    if not np.all((M == 0) | (M == 1)):
        raise MatrixFormatError("boolean matrix has entries outside {0, 1}")
    return M.astype(np.uint8)


def require_square(A: np.ndarray) -> int:
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise NotSquare(f"expected a square matrix, got shape {A.shape}")
    return A.shape[0]


def column_norm(Q) -> float:
    """Largest Euclidean norm among the columns of ``Q``."""
    Q = np.asarray(Q, dtype=np.float64)
    return float(np.sqrt((Q * Q).sum(axis=0).max()))


def row_norm(Q) -> float:
    """Largest Euclidean norm among the rows of ``Q``."""
    Q = np.asarray(Q, dtype=np.float64)
    return float(np.sqrt((Q * Q).sum(axis=1).max()))


def frobenius(A) -> float:
    A = np.asarray(A, dtype=np.float64)
    return float(np.sqrt((A * A).sum()))


def _complete_orthonormal(U: np.ndarray, have: np.ndarray) -> np.ndarray:
    """Replace columns of ``U`` not flagged in ``have`` by an orthonormal completion."""
    m = U.shape[0]
    basis = [U[:, k] for k in range(U.shape[1]) if have[k]]
    candidates = iter(np.eye(m))
    for k in range(U.shape[1]):
        if have[k]:
            continue
        for e in candidates:
            w = e.copy()
            for _ in range(2):
                for b in basis:
                    w -= (b @ w) * b
            nrm = np.linalg.norm(w)
            if nrm > 1e-8:
                U[:, k] = w / nrm
                basis.append(U[:, k])
                break
    return U


def svd(A, tol: float = SVD_TOL, max_sweeps: int = SVD_MAX_SWEEPS):
    """Thin SVD ``A = U @ diag(s) @ Vt`` by one-sided Jacobi.

    Returns ``(U, s, Vt)`` with ``s`` non-increasing and of length
    ``min(rows, cols)``. Raises :class:`ConvergenceFailure` when a sweep
    with no rotation is not reached within ``max_sweeps``.
    """
    A = as_real_matrix(A)
    m, n = A.shape
    if m < n:
        U, s, Vt = svd(A.T, tol=tol, max_sweeps=max_sweeps)
        return Vt.T.copy(), s, U.T.copy()

    cols = np.ascontiguousarray(A.T)
    vcols = np.eye(n)
    # Columns at rounding-noise level cannot be made relatively orthogonal.
    floor = (m * np.finfo(np.float64).eps * frobenius(A)) ** 2
    sweeps = kernels.jacobi_rotate(cols, vcols, tol, floor, max_sweeps)
    if sweeps < 0:
        raise ConvergenceFailure(f"Jacobi SVD did not converge in {max_sweeps} sweeps")

    s = np.sqrt((cols * cols).sum(axis=1))
    order = np.argsort(-s, kind="stable")
    s = s[order]
    cols = cols[order]
    Vt = vcols[order]

    cutoff = (s[0] if s.size else 0.0) * m * np.finfo(np.float64).eps
    have = s > max(cutoff, np.finfo(np.float64).tiny)
    U = np.zeros((m, n))
    U[:, have] = (cols[have] / s[have, None]).T
    if not have.all():
        U = _complete_orthonormal(U, have)
    return U, s, Vt


def singular_values(A) -> np.ndarray:
    return svd(A)[1]


def trace_norm(A) -> float:
    """Sum of singular values."""
    return float(singular_values(A).sum())


def operator_norm(A) -> float:
    return float(singular_values(A)[0])


def numeric_rank(A, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    s = singular_values(A)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def psd_sqrt(G, symmetry_tol: float = SYMMETRY_TOL, psd_tol: float = PSD_TOL) -> np.ndarray:
    """Symmetric square root ``T`` of a PSD matrix, so that ``T.T @ T == G``.

    Eigenvalues in ``[-psd_tol, 0)`` are clamped to zero.
    """
    G = as_real_matrix(G)
    require_square(G)
    asym = float(np.abs(G - G.T).max())
    if asym > symmetry_tol:
        raise NotSymmetric(f"matrix asymmetry {asym:.3g} exceeds {symmetry_tol:g}")
    lam, V = np.linalg.eigh((G + G.T) / 2)
    if lam[0] < -psd_tol:
        raise NotPSD(f"eigenvalue {lam[0]:.3g} below -{psd_tol:g}")
    root = np.sqrt(np.clip(lam, 0.0, None))
    return (V * root) @ V.T


# -- matrix text format ------------------------------------------------------


def _content_lines(text: str):
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            yield line


def _parse_matrix_lines(lines, boolean: bool) -> np.ndarray:
    try:
        header = next(lines)
    except StopIteration:
        raise MatrixFormatError("missing 'rows cols' header") from None
    parts = header.split()
    if len(parts) != 2:
        raise MatrixFormatError(f"bad header {header!r}: expected 'rows cols'")
    try:
        rows, cols = int(parts[0]), int(parts[1])
    except ValueError:
        raise MatrixFormatError(f"bad header {header!r}: dimensions must be integers") from None
    if rows <= 0 or cols <= 0:
        raise MatrixFormatError(f"bad header {header!r}: dimensions must be positive")
    data = np.empty((rows, cols))
    for r in range(rows):
        try:
            line = next(lines)
        except StopIteration:
            raise MatrixFormatError(f"expected {rows} rows, got {r}") from None
        fields = line.split()
        if len(fields) != cols:
            raise MatrixFormatError(f"row {r + 1}: expected {cols} entries, got {len(fields)}")
        try:
            data[r] = [float(v) for v in fields]
        except ValueError:
            raise MatrixFormatError(f"row {r + 1}: non-numeric entry in {line!r}") from None
    if not np.all(np.isfinite(data)):
        raise MatrixFormatError("matrix has non-finite entries")
    return as_boolean_matrix(data) if boolean else data


def parse_matrix(text: str, boolean: bool = False) -> np.ndarray:
    """Parse one matrix in the ``rows cols`` + rows text format."""
    lines = _content_lines(text)
    M = _parse_matrix_lines(lines, boolean)
    if next(lines, None) is not None:
        raise MatrixFormatError("trailing content after matrix")
    return M


def _format_entry(v) -> str:
    v = float(v)
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(v)


def format_matrix(A, comment: str | None = None) -> str:
    A = np.asarray(A)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(f"{A.shape[0]} {A.shape[1]}")
    out.extend(" ".join(_format_entry(v) for v in row) for row in A)
    return "\n".join(out) + "\n"


def load_matrix(path, boolean: bool = False) -> np.ndarray:
    return parse_matrix(Path(path).read_text(), boolean=boolean)


def save_matrix(path, A, comment: str | None = None) -> None:
    Path(path).write_text(format_matrix(A, comment))


def is_boolean(A) -> bool:
    A = np.asarray(A)
    return bool(np.all((A == 0) | (A == 1)))

