# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled band-matrix kernels.

Band storage convention: a half-bandwidth-p matrix A is an (n, 2p+1)
complex array with A[i, p + d] = a_{i, i+d} (column index mod n for
periodic matrices, structurally zero outside [0, n) otherwise).
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def band_mul(cnp.complex128_t[:, ::1] A, int p,
             cnp.complex128_t[:, ::1] B, int b,
             bint periodic):
    """C = A @ B in band storage; returns (C, q) with q = p + b."""
    cdef int n = A.shape[0]
    cdef int q = p + b
    cdef cnp.ndarray[cnp.complex128_t, ndim=2] C = \
        np.zeros((n, 2 * q + 1), dtype=np.complex128)
    cdef cnp.complex128_t[:, ::1] Cv = C
    cdef int i, e, g, row
    cdef cnp.complex128_t a
    for i in range(n):
        for e in range(-p, p + 1):
            a = A[i, p + e]
            if a == 0:
                continue
            row = i + e
            if periodic:
                row %= n
                if row < 0:
                    row += n
            elif row < 0 or row >= n:
                continue
            for g in range(-b, b + 1):
                Cv[i, q + e + g] = Cv[i, q + e + g] + a * B[row, b + g]
    return C, q


def band_diag_inner(cnp.complex128_t[:, ::1] A, int p,
                    cnp.complex128_t[:, ::1] B, int b,
                    bint periodic):
    """tr(A @ B) for band-stored A, B."""
    cdef int n = A.shape[0]
    cdef int lo = -p if p < b else -b
    cdef int hi = p if p < b else b
    cdef int i, e, row
    cdef cnp.complex128_t acc = 0
    for i in range(n):
        for e in range(lo, hi + 1):
            row = i + e
            if periodic:
                row %= n
                if row < 0:
                    row += n
            elif row < 0 or row >= n:
                continue
            acc = acc + A[i, p + e] * B[row, b - e]
    return complex(acc)


def band_matvec(cnp.complex128_t[:, ::1] A, int p,
                cnp.complex128_t[::1] v, bint periodic):
    """y = A @ v for band-stored A."""
    cdef int n = A.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] y = \
        np.zeros(n, dtype=np.complex128)
    cdef cnp.complex128_t[::1] yv = y
    cdef int i, d, col
    cdef cnp.complex128_t acc
    for i in range(n):
        acc = 0
        for d in range(-p, p + 1):
            col = i + d
            if periodic:
                col %= n
                if col < 0:
                    col += n
            elif col < 0 or col >= n:
                continue
            acc = acc + A[i, p + d] * v[col]
        yv[i] = acc
    return y
