"""Quantum fingerprint simulation of public-coin simultaneous message protocols.

Classical public-coin SMP protocols are compiled into fingerprint states
(basic and decomposition-based), the SWAP-test referee is simulated at the
outcome-distribution level, and row-column width of referee matrices is
bracketed by constructive upper bounds and a trace-norm lower bound.
"""

from .kernels import BACKEND

__version__ = "0.1.0"

__all__ = ["BACKEND", "__version__"]
