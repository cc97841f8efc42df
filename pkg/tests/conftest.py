import numpy as np
import pytest

from qfingerprint import _fallback

try:
    from qfingerprint import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [_fallback] + ([_kernels] if _kernels is not None else [])


@pytest.fixture(params=BACKENDS, ids=lambda m: m.__name__.rsplit(".", 1)[-1])
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
