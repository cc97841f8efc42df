"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Same signatures and in-place semantics, so either module can back
:mod:`qfingerprint.kernels`.
"""

import math

import numpy as np


def jacobi_rotate(cols, vcols, tol, floor, max_sweeps):
    n = cols.shape[0]
    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                ci = cols[i]
                cj = cols[j]
                alpha = float(ci @ ci)
                beta = float(cj @ cj)
                gamma = float(ci @ cj)
                if (
                    gamma == 0.0
                    or abs(gamma) <= tol * math.sqrt(alpha) * math.sqrt(beta)
                    or alpha <= floor
                    or beta <= floor
                ):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1.0 + zeta * zeta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = c * t
                cols[i], cols[j] = c * ci - s * cj, s * ci + c * cj
                vi = vcols[i].copy()
                vcols[i] = c * vi - s * vcols[j]
                vcols[j] = s * vi + c * vcols[j]
        if not rotated:
            return sweep + 1
    return -1


def accept_counts(alice, bob, referee):
    counts = np.zeros((alice.shape[0], bob.shape[0]), dtype=np.int64)
    for l in range(alice.shape[1]):
        counts += referee[l][np.ix_(alice[:, l], bob[:, l])]
    return counts
