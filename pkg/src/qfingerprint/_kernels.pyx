# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. ``_fallback`` holds the reference implementations."""

from libc.math cimport fabs, sqrt

import numpy as np
cimport numpy as cnp

cnp.import_array()


def jacobi_rotate(double[:, ::1] cols, double[:, ::1] vcols, double tol,
                  double floor, int max_sweeps):
    """One-sided Jacobi on the rows of ``cols`` (the columns of the input).

    Pairs whose squared norm is at most ``floor`` count as converged.
    Rotations are mirrored onto ``vcols``. Returns the number of sweeps used,
    or -1 if the cap was hit before a sweep finished without rotating.
    """
    cdef Py_ssize_t n = cols.shape[0]
    cdef Py_ssize_t m = cols.shape[1]
    cdef Py_ssize_t nv = vcols.shape[1]
    cdef Py_ssize_t i, j, k
    cdef int sweep
    cdef bint rotated
    cdef double alpha, beta, gamma, zeta, t, c, s, xi, xj

    for sweep in range(max_sweeps):
        rotated = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for k in range(m):
                    xi = cols[i, k]
                    xj = cols[j, k]
                    alpha += xi * xi
                    beta += xj * xj
                    gamma += xi * xj
                if (gamma == 0.0 or fabs(gamma) <= tol * sqrt(alpha) * sqrt(beta)
                        or alpha <= floor or beta <= floor):
                    continue
                rotated = True
                zeta = (beta - alpha) / (2.0 * gamma)
                if zeta >= 0:
                    t = 1.0 / (zeta + sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + sqrt(1.0 + zeta * zeta))
                c = 1.0 / sqrt(1.0 + t * t)
                s = c * t
                for k in range(m):
                    xi = cols[i, k]
                    xj = cols[j, k]
                    cols[i, k] = c * xi - s * xj
                    cols[j, k] = s * xi + c * xj
                for k in range(nv):
                    xi = vcols[i, k]
                    xj = vcols[j, k]
                    vcols[i, k] = c * xi - s * xj
                    vcols[j, k] = s * xi + c * xj
        if not rotated:
            return sweep + 1
    return -1


def accept_counts(const cnp.int64_t[:, ::1] alice, const cnp.int64_t[:, ::1] bob,
                  const cnp.uint8_t[:, :, ::1] referee):
    """count[x, y] = number of coins l with D_l(a(x,l), b(y,l)) = 1."""
    cdef Py_ssize_t nx = alice.shape[0]
    cdef Py_ssize_t ny = bob.shape[0]
    cdef Py_ssize_t L = alice.shape[1]
    cdef Py_ssize_t x, y, l
    cdef cnp.int64_t acc
    out = np.zeros((nx, ny), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = out
    for x in range(nx):
        for y in range(ny):
            acc = 0
            for l in range(L):
                acc += referee[l, alice[x, l], bob[y, l]]
            counts[x, y] = acc
    return out
