"""Fingerprint states compiled from a classical protocol.

Every state lives in a ``flag x coin x payload`` register (see
:class:`FingerprintLayout`). The cross inner product of Alice's and Bob's
states equals the classical acceptance probability divided by a known
normalizer: ``sqrt(MA)`` for the basic construction, ``rw * cw`` for the
decomposition construction. Junk padding sits on a flag value the other
party never uses, so it does not touch the cross inner product.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DecompositionMismatch, DegenerateWidth, DimensionMismatch, NotNormalized
from .linalg import format_matrix
from .smp import ClassicalSMP, _check_input, pad_to_square
from .width import Decomposition

NORM_TOL = 1e-12

# Flag values of the 4-dim flag register used by the decomposition construction.
FLAG_MAIN = 0  # |00>
FLAG_ALICE_JUNK = 1  # |01>
FLAG_BOB_JUNK = 2  # |10>


@dataclass(frozen=True)
class FingerprintLayout:
    flag_dim: int
    coin_dim: int
    payload_dim: int

    @property
    def dim(self) -> int:
        return self.flag_dim * self.coin_dim * self.payload_dim

    def index(self, flag: int, l: int, a: int) -> int:
        return (flag * self.coin_dim + l) * self.payload_dim + a

    def qubits(self) -> int:
        """Qubits needed to hold one state: each register rounded up separately."""
        return sum(math.ceil(math.log2(d)) for d in (self.flag_dim, self.coin_dim, self.payload_dim))


@dataclass(frozen=True)
class StateVector:
    amps: np.ndarray
    layout: FingerprintLayout

    def __post_init__(self):
        if self.amps.shape != (self.layout.dim,):
            raise DimensionMismatch(f"amplitudes {self.amps.shape} do not fit layout dim {self.layout.dim}")
        self.amps.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.layout.dim

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def blocks(self) -> np.ndarray:
        """Amplitudes reshaped to ``(flag, coin, payload)``."""
        lay = self.layout
        return self.amps.reshape(lay.flag_dim, lay.coin_dim, lay.payload_dim)

    def to_text(self, comment: str | None = None) -> str:
        return format_matrix(self.amps.reshape(-1, 1), comment)


def _pad(main: np.ndarray, layout: FingerprintLayout, junk_flag: int) -> StateVector:
    """Place ``main`` on flag 0 and the missing norm on ``(junk_flag, 0, 0)``."""
    amps = np.zeros(layout.dim)
    block = layout.coin_dim * layout.payload_dim
    amps[:block] = main.ravel()
    sq = float(main.ravel() @ main.ravel())
    if sq > 1 + NORM_TOL:
        raise NotNormalized(f"unpadded state has squared norm {sq} > 1")
    rest = 1.0 - sq
    amps[layout.index(junk_flag, 0, 0)] = math.sqrt(rest) if rest > NORM_TOL else 0.0
    return StateVector(amps, layout)


def alice_fingerprint_basic(p: ClassicalSMP, x: int) -> StateVector:
    """Uniform superposition over coins of ``|l>|a(x, l)>``; no junk needed."""
    _check_input(p, x, 0)
    lay = FingerprintLayout(2, p.L, p.MA)
    amps = np.zeros(lay.dim)
    l = np.arange(p.L)
    amps[lay.index(0, l, p.alice[x])] = 1 / math.sqrt(p.L)
    return StateVector(amps, lay)


def bob_fingerprint_basic(p: ClassicalSMP, y: int) -> StateVector:
    """Coin ``l`` carries column ``b(y, l)`` of ``D_l``, scaled by ``1/sqrt(L MA)``."""
    _check_input(p, 0, y)
    lay = FingerprintLayout(2, p.L, p.MA)
    l = np.arange(p.L)
    main = p.referee[l, :, p.bob[y]].astype(np.float64) / math.sqrt(p.L * p.MA)
    return _pad(main, lay, junk_flag=1)


def _check_decomposition(p: ClassicalSMP, d: Decomposition) -> ClassicalSMP:
    sq = pad_to_square(p)
    if d.L != sq.L or d.M != sq.MA:
        raise DecompositionMismatch(
            f"decomposition has L={d.L}, M={d.M}; protocol needs L={sq.L}, M={sq.MA}"
        )
    if not np.allclose(d.family, sq.referee, rtol=0, atol=1e-12):
        raise DecompositionMismatch("decomposition family differs from the referee matrices")
    return sq


def alice_fingerprint_decomp(p: ClassicalSMP, d: Decomposition, x: int) -> StateVector:
    """Coin ``l`` carries row ``a(x, l)`` of ``E_l``, scaled by ``1/(rw sqrt(L))``."""
    sq = _check_decomposition(p, d)
    _check_input(sq, x, 0)
    if d.rw == 0:
        raise DegenerateWidth("row width is zero")
    lay = FingerprintLayout(4, sq.L, d.K)
    l = np.arange(sq.L)
    main = d.E[l, sq.alice[x], :] / (d.rw * math.sqrt(sq.L))
    return _pad(main, lay, junk_flag=FLAG_ALICE_JUNK)


def bob_fingerprint_decomp(p: ClassicalSMP, d: Decomposition, y: int) -> StateVector:
    """Coin ``l`` carries column ``b(y, l)`` of ``F_l``, scaled by ``1/(cw sqrt(L))``."""
    sq = _check_decomposition(p, d)
    _check_input(sq, 0, y)
    if d.cw == 0:
        raise DegenerateWidth("column width is zero")
    lay = FingerprintLayout(4, sq.L, d.K)
    l = np.arange(sq.L)
    main = d.F[l, :, sq.bob[y]] / (d.cw * math.sqrt(sq.L))
    return _pad(main, lay, junk_flag=FLAG_BOB_JUNK)


def inner_product(u: StateVector, v: StateVector) -> float:
    if u.dim != v.dim:
        raise DimensionMismatch(f"state dimensions differ: {u.dim} vs {v.dim}")
    return float(u.amps @ v.amps)
