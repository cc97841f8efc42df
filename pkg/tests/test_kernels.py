import numpy as np
import pytest

from qfingerprint import kernels
from qfingerprint.linalg import frobenius
from qfingerprint.zoo import random_protocol

from conftest import BACKENDS


def _run_jacobi(mod, A, tol=1e-12, sweeps=100):
    cols = np.ascontiguousarray(A.T, dtype=np.float64)
    vcols = np.eye(A.shape[1])
    floor = (A.shape[0] * np.finfo(float).eps * frobenius(A)) ** 2
    used = mod.jacobi_rotate(cols, vcols, tol, floor, sweeps)
    return cols, vcols, used


@pytest.mark.parametrize("shape", [(4, 4), (9, 5), (16, 16), (30, 2)])
def test_jacobi_orthogonalizes_columns(backend, rng, shape):
    A = rng.normal(size=shape)
    cols, vcols, used = _run_jacobi(backend, A)
    assert used > 0
    gram = cols @ cols.T
    off = gram - np.diag(np.diag(gram))
    assert np.abs(off).max() <= 1e-10 * np.abs(gram).max()
    # A V = columns, V orthogonal
    np.testing.assert_allclose(A @ vcols.T, cols.T, atol=1e-12)
    np.testing.assert_allclose(vcols @ vcols.T, np.eye(shape[1]), atol=1e-12)


def test_jacobi_reports_cap(backend, rng):
    A = rng.normal(size=(8, 8))
    _, _, used = _run_jacobi(backend, A, sweeps=1)
    assert used == -1


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled extension not built")
def test_backends_agree_on_jacobi(rng):
    A = (rng.random((12, 12)) < 0.4).astype(float)
    ca, va, ua = _run_jacobi(BACKENDS[0], A)
    cb, vb, ub = _run_jacobi(BACKENDS[1], A)
    assert ua == ub
    np.testing.assert_allclose(ca, cb, atol=1e-12)
    np.testing.assert_allclose(va, vb, atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_accept_counts_matches_loop(backend, seed):
    p = random_protocol(3, 7, 2, 3, 0.4, seed)
    counts = backend.accept_counts(p.alice, p.bob, p.referee)
    for x in range(8):
        for y in range(8):
            expect = sum(int(p.referee[l, p.alice[x, l], p.bob[y, l]]) for l in range(p.L))
            assert counts[x, y] == expect


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
