"""Concrete protocols and matrices: equality hashing, inner product, random instances."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, ValidationExhausted
from .smp import ClassicalSMP, CorrectnessThresholds, TargetFunction, validate

log = logging.getLogger(__name__)

MAX_IP_BITS = 7
MAX_RESEEDS = 20


def parity(v: np.ndarray) -> np.ndarray:
    """Bitwise parity of each non-negative integer in ``v``."""
    v = np.asarray(v, dtype=np.int64).copy()
    out = np.zeros_like(v)
    while np.any(v):
        out ^= v & 1
        v >>= 1
    return out


def ip_matrix(n: int) -> np.ndarray:
    """``D[x, y] = x . y mod 2`` over n-bit strings, rows and columns in counting order."""
    if not 1 <= n <= MAX_IP_BITS:
        raise InvalidConfig(f"n must be in 1..{MAX_IP_BITS}, got {n}")
    x = np.arange(2**n)
    return parity(x[:, None] & x[None, :]).astype(np.uint8)


def ip_signed_matrix(n: int) -> np.ndarray:
    """``2 D - J`` for the inner-product matrix ``D``; an unnormalized Hadamard matrix."""
    return 2 * ip_matrix(n).astype(np.int64) - 1


def first_column_ones(M: int) -> np.ndarray:
    if M < 1:
        raise InvalidConfig("M must be positive")
    Q = np.zeros((M, M), dtype=np.uint8)
    Q[:, 0] = 1
    return Q


def random_boolean_matrix(M: int, density: float = 0.5, seed=0, cols: int | None = None):
    rng = np.random.default_rng(seed)
    return (rng.random((M, cols or M)) < density).astype(np.uint8)


def random_protocol(
    n: int, L: int, cA: int, cB: int, density: float = 0.5, seed=0
) -> ClassicalSMP:
    """Uniform message tables and Bernoulli(``density``) referee entries."""
    if not (0 <= n <= 6 and 1 <= L <= 64 and 0 <= cA <= 4 and 0 <= cB <= 4):
        raise InvalidConfig("random_protocol needs n <= 6, L <= 64, cA, cB <= 4")
    if not 0.0 <= density <= 1.0:
        raise InvalidConfig("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    N = 2**n
    alice = rng.integers(0, 2**cA, size=(N, L))
    bob = rng.integers(0, 2**cB, size=(N, L))
    referee = (rng.random((L, 2**cA, 2**cB)) < density).astype(np.uint8)
    return ClassicalSMP(n, cA, cB, alice, bob, referee)


@dataclass(frozen=True)
class EqualityParams:
    n: int
    L: int
    t: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise InvalidConfig("n must be at least 1")
        if self.L < 1:
            raise InvalidConfig("L must be at least 1")
        if not 1 <= self.t <= 8:
            raise InvalidConfig("t must be in 1..8")


def _hash_messages(n: int, r: np.ndarray) -> np.ndarray:
    """Message table ``[x, l]`` packing the t parities ``x . r[l, i]`` into an integer."""
    x = np.arange(2**n)[:, None, None]
    bits = parity(x & r[None, :, :])  # (2^n, L, t)
    weights = 1 << np.arange(r.shape[1])
    return (bits * weights).sum(axis=2)


def build_equality_protocol(
    params: EqualityParams,
    thresholds: CorrectnessThresholds = CorrectnessThresholds(),
    max_attempts: int = MAX_RESEEDS,
) -> ClassicalSMP:
    """Public-coin equality via t inner-product hashes per coin; the referee compares them.

    Attempt ``k`` draws its hash vectors from ``default_rng([seed, k])``. The first
    draw that validates against equality at ``thresholds`` is returned.
    """
    n, L, t = params.n, params.L, params.t
    eq = TargetFunction.equality(n)
    referee = np.broadcast_to(np.eye(2**t, dtype=np.uint8), (L, 2**t, 2**t))
    for attempt in range(max_attempts):
        rng = np.random.default_rng([params.seed, attempt])
        r = rng.integers(0, 2**n, size=(L, t))
        msgs = _hash_messages(n, r)
        p = ClassicalSMP(n, t, t, msgs, msgs, referee)
        report = validate(p, eq, thresholds)
        if report.valid:
            if attempt:
                log.info("equality protocol valid after %d re-seeds", attempt)
            return p
        log.debug("attempt %d: %d violations", attempt, len(report.violations))
    raise ValidationExhausted(
        f"no valid equality protocol for n={n}, L={L}, t={t} in {max_attempts} attempts"
    )
