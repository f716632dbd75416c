# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled elementary symmetric function kernels.

Both routines work row-wise on a ``(K, n)`` array of eigenvalues and must
return exactly what :mod:`mhessian._kernels_py` returns.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()


def esp(double[:, ::1] lam):
    """All elementary symmetric polynomials ``S_0..S_n`` of each row."""
    cdef Py_ssize_t K = lam.shape[0], n = lam.shape[1]
    cdef Py_ssize_t k, i, p
    cdef double x
    out_arr = np.zeros((K, n + 1), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    for k in range(K):
        out[k, 0] = 1.0
        for i in range(n):
            x = lam[k, i]
            for p in range(i + 1, 0, -1):
                out[k, p] += x * out[k, p - 1]
    return out_arr


def deleted_esp(double[:, ::1] lam):
    """``out[k, i, p] = S_p(lam[k] with entry i removed)``, ``p = 0..n-1``."""
    cdef Py_ssize_t K = lam.shape[0], n = lam.shape[1]
    cdef Py_ssize_t k, i, j, p, cnt
    cdef double x
    out_arr = np.zeros((K, n, n), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    for k in range(K):
        for i in range(n):
            out[k, i, 0] = 1.0
            cnt = 0
            for j in range(n):
                if j == i:
                    continue
                x = lam[k, j]
                cnt += 1
                for p in range(cnt, 0, -1):
                    out[k, i, p] += x * out[k, i, p - 1]
    return out_arr
