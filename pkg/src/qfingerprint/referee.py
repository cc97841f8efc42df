"""SWAP-test referee: repetition count, decision rule, Monte-Carlo runs, qubit costs.

The referee sees only SWAP-test outcomes. On a pair of pure states the test
outputs 0 with probability ``(1 + s^2) / 2`` where ``s = <u|v>``, and
outcomes on independent copies are i.i.d., so a run of ``copies`` tests is
sampled as one binomial draw instead of simulating gates.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np

from .errors import DimensionMismatch, InvalidConfig, NotNormalized
from .fingerprint import (
    StateVector,
    alice_fingerprint_basic,
    alice_fingerprint_decomp,
    bob_fingerprint_basic,
    bob_fingerprint_decomp,
    inner_product,
)
from .smp import ClassicalSMP, CorrectnessThresholds
from .width import Decomposition

Mode = Union[str, Decomposition]
NORMALIZATION_TOL = 1e-9
GAP_DIVISOR_SLACK = 1e-9


@dataclass(frozen=True)
class RefereeConfig:
    """``g`` divides the classical acceptance probability to give ``<u|v>``."""

    g: float
    alpha0: float = 1 / 3
    alpha1: float = 2 / 3
    delta: float = 0.25
    copies: int | None = None

    def __post_init__(self):
        if not 0 < self.alpha0 < self.alpha1 < 1:
            raise InvalidConfig(f"need 0 < alpha0 < alpha1 < 1, got {self.alpha0}, {self.alpha1}")
        if not self.g >= 1 - GAP_DIVISOR_SLACK:
            raise InvalidConfig(f"gap divisor g must be >= 1, got {self.g}")
        if not 0 < self.delta < 0.5:
            raise InvalidConfig(f"delta must lie in (0, 1/2), got {self.delta}")
        if self.copies is not None and self.copies < 1:
            raise InvalidConfig(f"copies override must be positive, got {self.copies}")

    @classmethod
    def basic(cls, p: ClassicalSMP, th=CorrectnessThresholds(), delta=0.25, copies=None):
        return cls(math.sqrt(p.MA), th.alpha0, th.alpha1, delta, copies)

    @classmethod
    def decomposition(cls, d: Decomposition, th=CorrectnessThresholds(), delta=0.25, copies=None):
        return cls(d.rcw, th.alpha0, th.alpha1, delta, copies)

    @property
    def half_gap(self) -> float:
        """Half the distance between the two promised SWAP acceptance levels."""
        return (self.alpha1**2 - self.alpha0**2) / (4 * self.g**2)

    @property
    def threshold(self) -> float:
        """Zero-fraction at or above which the referee outputs 1."""
        mid = (self.alpha1**2 + self.alpha0**2) / 2 / self.g**2
        return (1 + mid) / 2


def copies_estimate(cfg: RefereeConfig) -> float:
    """Unrounded Hoeffding count ``ln(2/delta) / (2 t^2)``."""
    t = cfg.half_gap
    return math.log(2 / cfg.delta) / (2 * t * t)


def required_copies(cfg: RefereeConfig) -> int:
    """Copies after which the empirical zero-fraction is within ``t`` of its mean
    except with probability ``delta`` (Hoeffding), ``t`` being half the gap."""
    return math.ceil(copies_estimate(cfg))


def effective_copies(cfg: RefereeConfig) -> int:
    return cfg.copies if cfg.copies is not None else required_copies(cfg)


def swap_accept_prob(u: StateVector, v: StateVector) -> float:
    """Probability that the SWAP test on ``u`` and ``v`` outputs 0."""
    if u.dim != v.dim:
        raise DimensionMismatch(f"state dimensions differ: {u.dim} vs {v.dim}")
    for name, w in (("u", u), ("v", v)):
        if abs(w.norm - 1) > NORMALIZATION_TOL:
            raise NotNormalized(f"{name} has norm {w.norm}")
    s = inner_product(u, v)
    return min(1.0, (1 + s * s) / 2)


def decide(zero_fraction: float, cfg: RefereeConfig) -> int:
    return int(zero_fraction >= cfg.threshold)


def fingerprints(p: ClassicalSMP, mode: Mode, x: int, y: int) -> tuple[StateVector, StateVector]:
    """Alice's and Bob's states for ``mode``: ``"basic"`` or a :class:`Decomposition`."""
    if isinstance(mode, Decomposition):
        return alice_fingerprint_decomp(p, mode, x), bob_fingerprint_decomp(p, mode, y)
    if mode == "basic":
        return alice_fingerprint_basic(p, x), bob_fingerprint_basic(p, y)
    raise InvalidConfig(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class SimulationStats:
    output: int | None
    swap_zero_fraction: float | None
    copies: int
    qubits_alice: int
    qubits_bob: int
    total_qubits: int
    bound_formula_value: float

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _layout_qubits(p: ClassicalSMP, mode: Mode) -> tuple[int, int]:
    u, v = fingerprints(p, mode, 0, 0)
    return u.layout.qubits(), v.layout.qubits()


def cost_report(p: ClassicalSMP, mode: Mode, cfg: RefereeConfig) -> SimulationStats:
    """Qubit accounting without sampling.

    ``bound_formula_value`` is ``g^2 (cA + cB + ceil(log2 L) + 2)``, the shape of
    the asymptotic cost bound with all constants set to one.
    """
    qa, qb = _layout_qubits(p, mode)
    copies = effective_copies(cfg)
    bound = cfg.g**2 * (p.cA + p.cB + math.ceil(math.log2(p.L)) + 2)
    return SimulationStats(None, None, copies, qa, qb, copies * (qa + qb), bound)


def simulate_quantum_protocol(
    p: ClassicalSMP, mode: Mode, x: int, y: int, cfg: RefereeConfig, rng: np.random.Generator
) -> SimulationStats:
    """One run of the quantum protocol on ``(x, y)``."""
    u, v = fingerprints(p, mode, x, y)
    pz = swap_accept_prob(u, v)
    cost = cost_report(p, mode, cfg)
    zeros = int(rng.binomial(cost.copies, pz))
    frac = zeros / cost.copies
    return SimulationStats(
        decide(frac, cfg),
        frac,
        cost.copies,
        cost.qubits_alice,
        cost.qubits_bob,
        cost.total_qubits,
        cost.bound_formula_value,
    )


def count_errors(
    p: ClassicalSMP,
    mode: Mode,
    x: int,
    y: int,
    expected: int,
    cfg: RefereeConfig,
    trials: int,
    rng: np.random.Generator,
) -> int:
    """Number of ``trials`` independent runs whose output differs from ``expected``.

    Equivalent to calling :func:`simulate_quantum_protocol` ``trials`` times,
    with the binomial draws batched.
    """
    u, v = fingerprints(p, mode, x, y)
    pz = swap_accept_prob(u, v)
    copies = effective_copies(cfg)
    zeros = rng.binomial(copies, pz, size=trials)
    outputs = (zeros / copies >= cfg.threshold).astype(int)
    return int(np.count_nonzero(outputs != expected))
