"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Both backends are imported directly, so the result does not depend on
QFINGERPRINT_PURE_PYTHON. Timings are the best of ``--repeat`` runs.
"""

import argparse
import timeit

import numpy as np

from qfingerprint import _fallback

try:
    from qfingerprint import _kernels
except ImportError:
    _kernels = None

SVD_TOL = 1e-12
MAX_SWEEPS = 100


def jacobi_case(M, seed):
    A = (np.random.default_rng(seed).random((M, M)) < 0.5).astype(float)
    floor = (M * np.finfo(float).eps * np.linalg.norm(A)) ** 2

    def run(mod):
        cols = np.ascontiguousarray(A.T)
        vcols = np.eye(M)
        mod.jacobi_rotate(cols, vcols, SVD_TOL, floor, MAX_SWEEPS)

    return run


def accept_case(N, L, MA, seed):
    rng = np.random.default_rng(seed)
    alice = rng.integers(0, MA, size=(N, L))
    bob = rng.integers(0, MA, size=(N, L))
    referee = (rng.random((L, MA, MA)) < 0.5).astype(np.uint8)

    def run(mod):
        mod.accept_counts(alice, bob, referee)

    return run


CASES = [
    ("jacobi_svd M=16", jacobi_case(16, 0)),
    ("jacobi_svd M=64", jacobi_case(64, 1)),
    ("jacobi_svd M=128", jacobi_case(128, 2)),
    ("accept_counts N=16 L=64 MA=8", accept_case(16, 64, 8, 3)),
    ("accept_counts N=64 L=256 MA=16", accept_case(64, 256, 16, 4)),
]


def best_time(fn, mod, repeat):
    number = 1
    while timeit.timeit(lambda: fn(mod), number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(lambda: fn(mod), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled extension not built; showing the fallback only")
    print(f"{'case':<34}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, fn in CASES:
        py = best_time(fn, _fallback, args.repeat) * 1e3
        if _kernels is None:
            print(f"{name:<34}{py:>14.3f}{'-':>14}{'-':>10}")
            continue
        cy = best_time(fn, _kernels, args.repeat) * 1e3
        print(f"{name:<34}{py:>14.3f}{cy:>14.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
