# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled reduction kernels for the bootstrap replicate loop.

Each replicate owns one row of the multiplier / index matrix; rows are
processed independently with a fixed accumulation order, so results do not
depend on batch size or on how replicates are scheduled.
"""

from libc.math cimport fabs, sqrt
from libc.stdint cimport int64_t

import numpy as np


def wild_max_reduce(const double[:, ::1] xc, const double[:, ::1] w, bint absolute):
    """max_j of sum_i w[r,i]*xc[i,j] / sqrt(n), one value per row of ``w``."""
    cdef Py_ssize_t b = w.shape[0]
    cdef Py_ssize_t n = xc.shape[0]
    cdef Py_ssize_t p = xc.shape[1]
    if w.shape[1] != n:
        raise ValueError("multiplier row length must equal the row count of xc")
    out_arr = np.empty(b, dtype=np.float64)
    acc_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] acc = acc_arr
    cdef Py_ssize_t r, i, j
    cdef double wi, m, v
    cdef double scale = 1.0 / sqrt(<double> n)
    with nogil:
        for r in range(b):
            for j in range(p):
                acc[j] = 0.0
            for i in range(n):
                wi = w[r, i]
                for j in range(p):
                    acc[j] += wi * xc[i, j]
            m = fabs(acc[0]) if absolute else acc[0]
            for j in range(1, p):
                v = fabs(acc[j]) if absolute else acc[j]
                if v > m:
                    m = v
            out[r] = m * scale
    return out_arr


def resample_max_reduce(const double[:, ::1] xc, const int64_t[:, ::1] idx, bint absolute):
    """Empirical-bootstrap reduction: gather rows by ``idx`` and max the column sums.

    Callers must guarantee 0 <= idx < n; the hot loop does not re-check.
    """
    cdef Py_ssize_t b = idx.shape[0]
    cdef Py_ssize_t n = xc.shape[0]
    cdef Py_ssize_t p = xc.shape[1]
    if idx.shape[1] != n:
        raise ValueError("index row length must equal the row count of xc")
    out_arr = np.empty(b, dtype=np.float64)
    acc_arr = np.empty(p, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef double[::1] acc = acc_arr
    cdef Py_ssize_t r, i, j
    cdef int64_t k
    cdef double m, v
    cdef double scale = 1.0 / sqrt(<double> n)
    with nogil:
        for r in range(b):
            for j in range(p):
                acc[j] = 0.0
            for i in range(n):
                k = idx[r, i]
                for j in range(p):
                    acc[j] += xc[k, j]
            m = fabs(acc[0]) if absolute else acc[0]
            for j in range(1, p):
                v = fabs(acc[j]) if absolute else acc[j]
                if v > m:
                    m = v
            out[r] = m * scale
    return out_arr
