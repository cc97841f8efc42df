"""Backend selection for the hot loops.

The Cython extension is used when it was built; otherwise the numpy
fallback is imported. Set ``QFINGERPRINT_PURE_PYTHON=1`` to force the
fallback (the benchmark and the kernel tests do this per call instead,
by importing both modules directly).
"""

import os

from . import _fallback

if os.environ.get("QFINGERPRINT_PURE_PYTHON"):
    _impl = _fallback
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _fallback
        BACKEND = "python"

jacobi_rotate = _impl.jacobi_rotate
accept_counts = _impl.accept_counts

__all__ = ["BACKEND", "jacobi_rotate", "accept_counts"]
