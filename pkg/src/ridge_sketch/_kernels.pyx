# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Signatures match ``_kernels_py``."""
import numpy as np

cimport numpy as cnp
cimport scipy.linalg.cython_blas as blas

cnp.import_array()


def countsketch_rows(const double[::1, :] A, const long long[::1] rows,
                     const double[::1] signs, Py_ssize_t s):
    """Y[rows[i], :] += signs[i] * A[i, :]; returns the s x n result."""
    cdef Py_ssize_t m = A.shape[0], n = A.shape[1]
    cdef Py_ssize_t i, j
    if rows.shape[0] != m or signs.shape[0] != m:
        raise ValueError("rows/signs length must equal A.shape[0]")
    out = np.zeros((s, n), dtype=np.float64, order="F")
    cdef double[::1, :] Y = out
    with nogil:
        for j in range(n):
            for i in range(m):
                Y[rows[i], j] += signs[i] * A[i, j]
    return out


def lowrank_apply(const double[::1, :] W, const double[::1] S, double scale,
                  const double[::1] x):
    """scale * (x - W diag(S) W^T x) with two BLAS gemv calls and no Python temporaries."""
    cdef int d = <int>W.shape[0], k = <int>W.shape[1]
    cdef int one = 1, j, i
    cdef double zero = 0.0, unit = 1.0, minus = -1.0
    cdef char trans_t = b"T", trans_n = b"N"
    if x.shape[0] != d or S.shape[0] < k:
        raise ValueError("dimension mismatch in lowrank_apply")
    out = np.array(x, dtype=np.float64, copy=True)
    cdef double[::1] y = out
    if k == 0 or d == 0:
        for i in range(d):
            y[i] = scale * y[i]
        return out
    cdef double[::1] t = np.empty(k, dtype=np.float64)
    with nogil:
        # t = W^T x
        blas.dgemv(&trans_t, &d, &k, &unit, <double*>&W[0, 0], &d,
                   <double*>&x[0], &one, &zero, &t[0], &one)
        for j in range(k):
            t[j] = S[j] * t[j]
        # y = x - W t
        blas.dgemv(&trans_n, &d, &k, &minus, <double*>&W[0, 0], &d,
                   &t[0], &one, &unit, &y[0], &one)
        for i in range(d):
            y[i] = scale * y[i]
    return out
