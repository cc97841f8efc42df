"""Classical public-coin simultaneous message protocols.

A protocol stores its message functions as explicit tables indexed by
``(input, coin)`` and one boolean referee matrix per coin value. The coin
is uniform over ``range(L)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DimensionMismatch, IndexOutOfRange, MatrixFormatError
from .linalg import _content_lines, _parse_matrix_lines, as_boolean_matrix, format_matrix


@dataclass(frozen=True)
class CorrectnessThresholds:
    """Acceptance must be at most ``alpha0`` when f = 0 and at least ``alpha1`` when f = 1."""

    alpha0: float = 1 / 3
    alpha1: float = 2 / 3

    def __post_init__(self):
        if not (0 < self.alpha0 < 0.5 < self.alpha1 < 1):
            raise ValueError(
                f"need 0 < alpha0 < 1/2 < alpha1 < 1, got ({self.alpha0}, {self.alpha1})"
            )


#: The 1/4 vs 3/4 gap required before the coin is made uniform.
STRICT_THRESHOLDS = CorrectnessThresholds(0.25, 0.75)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


class ClassicalSMP:
    """Immutable public-coin SMP protocol.

    ``alice[x, l]`` is Alice's message on input ``x`` and coin ``l``;
    ``bob[y, l]`` likewise. ``referee[l]`` is the ``MA x MB`` boolean
    matrix the referee evaluates at ``(alice[x, l], bob[y, l])``.
    """

    __slots__ = ("n", "L", "cA", "cB", "alice", "bob", "referee")

    def __init__(self, n: int, cA: int, cB: int, alice, bob, referee):
        alice = np.array(alice, dtype=np.int64)
        bob = np.array(bob, dtype=np.int64)
        referee = np.asarray(referee)
        if referee.ndim == 2:
            referee = referee[None]
        if n < 0 or cA < 0 or cB < 0:
            raise DimensionMismatch("n, cA, cB must be non-negative")
        N = 2**n
        if alice.ndim != 2 or alice.shape[0] != N or bob.shape != alice.shape:
            raise DimensionMismatch(
                f"message tables must both be {N} x L, got {alice.shape} and {bob.shape}"
            )
        L = alice.shape[1]
        if L < 1:
            raise DimensionMismatch("need at least one coin value")
        MA, MB = 2**cA, 2**cB
        if referee.shape != (L, MA, MB):
            raise DimensionMismatch(f"referee stack must be {(L, MA, MB)}, got {referee.shape}")
        if not np.all((referee == 0) | (referee == 1)):
            raise MatrixFormatError("referee matrices must be boolean")
        if alice.min() < 0 or alice.max() >= MA or bob.min() < 0 or bob.max() >= MB:
            raise IndexOutOfRange("message table entry outside the message space")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "cA", cA)
        object.__setattr__(self, "cB", cB)
        object.__setattr__(self, "alice", _readonly(alice))
        object.__setattr__(self, "bob", _readonly(bob))
        object.__setattr__(self, "referee", _readonly(referee.astype(np.uint8)))

    def __setattr__(self, name, value):
        raise AttributeError("ClassicalSMP is immutable")

    @property
    def MA(self) -> int:
        return 2**self.cA

    @property
    def MB(self) -> int:
        return 2**self.cB

    @property
    def num_inputs(self) -> int:
        return 2**self.n

    def __eq__(self, other):
        if not isinstance(other, ClassicalSMP):
            return NotImplemented
        return (
            (self.n, self.L, self.cA, self.cB) == (other.n, other.L, other.cA, other.cB)
            and np.array_equal(self.alice, other.alice)
            and np.array_equal(self.bob, other.bob)
            and np.array_equal(self.referee, other.referee)
        )

    def __hash__(self):
        return hash((self.n, self.L, self.cA, self.cB, self.alice.tobytes(), self.bob.tobytes()))

    def __repr__(self):
        return f"ClassicalSMP(n={self.n}, L={self.L}, cA={self.cA}, cB={self.cB})"


@dataclass(frozen=True)
class TargetFunction:
    n: int
    table: np.ndarray

    def __post_init__(self):
        t = as_boolean_matrix(self.table)
        if t.shape != (2**self.n, 2**self.n):
            raise DimensionMismatch(f"target table must be {2**self.n} x {2**self.n}")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __call__(self, x: int, y: int) -> int:
        return int(self.table[x, y])

    @classmethod
    def equality(cls, n: int) -> TargetFunction:
        return cls(n, np.eye(2**n, dtype=np.uint8))

    @classmethod
    def constant(cls, n: int, value: int) -> TargetFunction:
        return cls(n, np.full((2**n, 2**n), value, dtype=np.uint8))


def _check_input(p: ClassicalSMP, x: int, y: int) -> None:
    N = p.num_inputs
    if not (0 <= x < N and 0 <= y < N):
        raise IndexOutOfRange(f"inputs must lie in [0, {N}), got ({x}, {y})")


def accepting_coins(p: ClassicalSMP) -> np.ndarray:
    """Integer matrix: ``[x, y]`` counts coins on which the referee outputs 1."""
    return kernels.accept_counts(p.alice, p.bob, p.referee)


def acceptance_fraction(p: ClassicalSMP, x: int, y: int) -> Fraction:
    _check_input(p, x, y)
    count = int(p.referee[np.arange(p.L), p.alice[x], p.bob[y]].sum())
    return Fraction(count, p.L)


def acceptance_probability(p: ClassicalSMP, x: int, y: int) -> float:
    """Probability over the uniform coin that the referee outputs 1 on ``(x, y)``."""
    return float(acceptance_fraction(p, x, y))


def acceptance_table(p: ClassicalSMP) -> np.ndarray:
    return accepting_coins(p) / p.L


@dataclass(frozen=True)
class Violation:
    x: int
    y: int
    f: int
    p_acc: float


@dataclass(frozen=True)
class ValidationReport:
    valid: bool
    violations: list[Violation] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "violations": [
                {"x": v.x, "y": v.y, "f": v.f, "p_acc": v.p_acc} for v in self.violations
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def validate(
    p: ClassicalSMP, f: TargetFunction, th: CorrectnessThresholds = CorrectnessThresholds()
) -> ValidationReport:
    """List every input pair on which ``p`` misses its acceptance threshold for ``f``."""
    if p.n != f.n:
        raise DimensionMismatch(f"protocol has n={p.n} but target has n={f.n}")
    counts = accepting_coins(p)
    L = p.L
    # Exact rational comparison count/L vs a/b, done as count*b vs a*L.
    lo = Fraction(th.alpha0).limit_denominator(10**9)
    hi = Fraction(th.alpha1).limit_denominator(10**9)
    f1 = f.table == 1
    bad = (f1 & (counts * hi.denominator < hi.numerator * L)) | (
        ~f1 & (counts * lo.denominator > lo.numerator * L)
    )
    violations = [
        Violation(int(x), int(y), int(f.table[x, y]), float(counts[x, y] / L))
        for x, y in zip(*np.nonzero(bad))
    ]
    return ValidationReport(not violations, violations)


def pad_to_square(p: ClassicalSMP) -> ClassicalSMP:
    """Zero-pad every referee matrix to ``M x M`` with ``M = max(MA, MB)``."""
    if p.cA == p.cB:
        return p
    c = max(p.cA, p.cB)
    M = 2**c
    padded = np.zeros((p.L, M, M), dtype=np.uint8)
    padded[:, : p.MA, : p.MB] = p.referee
    return ClassicalSMP(p.n, c, c, p.alice, p.bob, padded)


def sample_classical_run(p: ClassicalSMP, x: int, y: int, rng: np.random.Generator) -> int:
    """Draw one coin and return the referee's output bit."""
    _check_input(p, x, y)
    l = int(rng.integers(p.L))
    return int(p.referee[l, p.alice[x, l], p.bob[y, l]])


# -- protocol text format ----------------------------------------------------


def format_protocol(p: ClassicalSMP) -> str:
    """Serialize: header line, Alice table, Bob table, then L referee matrices."""
    out = [
        "# public-coin SMP protocol",
        f"smp n={p.n} L={p.L} cA={p.cA} cB={p.cB}",
        "# alice[x, l]",
    ]
    out.extend(" ".join(map(str, row)) for row in p.alice)
    out.append("# bob[y, l]")
    out.extend(" ".join(map(str, row)) for row in p.bob)
    text = "\n".join(out) + "\n"
    for l in range(p.L):
        text += format_matrix(p.referee[l], comment=f"referee D_{l}")
    return text


def _parse_table(lines, rows: int, cols: int, what: str) -> np.ndarray:
    table = np.empty((rows, cols), dtype=np.int64)
    for r in range(rows):
        line = next(lines, None)
        if line is None:
            raise MatrixFormatError(f"{what}: expected {rows} rows, got {r}")
        fields = line.split()
        if len(fields) != cols:
            raise MatrixFormatError(f"{what} row {r}: expected {cols} entries")
        try:
            table[r] = [int(v) for v in fields]
        except ValueError:
            raise MatrixFormatError(f"{what} row {r}: non-integer entry") from None
    return table


def parse_protocol(text: str) -> ClassicalSMP:
    lines = _content_lines(text)
    header = next(lines, None)
    if header is None or not header.startswith("smp"):
        raise MatrixFormatError("protocol must start with an 'smp n=.. L=.. cA=.. cB=..' line")
    fields = {}
    for tok in header.split()[1:]:
        key, sep, val = tok.partition("=")
        if not sep:
            raise MatrixFormatError(f"bad header field {tok!r}")
        try:
            fields[key] = int(val)
        except ValueError:
            raise MatrixFormatError(f"header field {key} must be an integer") from None
    missing = {"n", "L", "cA", "cB"} - fields.keys()
    if missing:
        raise MatrixFormatError(f"header missing fields {sorted(missing)}")
    n, L = fields["n"], fields["L"]
    if n < 0 or n > 20 or L < 1:
        raise MatrixFormatError("header values out of range")
    alice = _parse_table(lines, 2**n, L, "alice")
    bob = _parse_table(lines, 2**n, L, "bob")
    mats = [_parse_matrix_lines(lines, boolean=True) for _ in range(L)]
    if next(lines, None) is not None:
        raise MatrixFormatError("trailing content after referee matrices")
    try:
        return ClassicalSMP(n, fields["cA"], fields["cB"], alice, bob, np.stack(mats))
    except (DimensionMismatch, IndexOutOfRange) as exc:
        raise MatrixFormatError(str(exc)) from exc


def load_protocol(path) -> ClassicalSMP:
    return parse_protocol(Path(path).read_text())


def save_protocol(path, p: ClassicalSMP) -> None:
    Path(path).write_text(format_protocol(p))
