# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops for the norm scans.

Mirrors the API of singint._core_py; singint._accel selects whichever
implementation imports cleanly.
"""

from libc.math cimport sqrt, pow

import numpy as np


def smoothness_scan(double[:, ::1] dist_xx,
                    double[:, ::1] dist_xy_sorted,
                    long[:, ::1] order_xy,
                    double[:, ::1] dist_pow_s2,
                    double complex[:, ::1] kmat,
                    double s3):
    """Max of d(x1,y)^s2 |K(x1,y)-K(x2,y)| / d(x1,x2)^s3 over admissible triples.

    Admissible means x1 != x2 in X and y in Y with d(x1,y) >= 2 d(x1,x2).
    dist_xy_sorted and order_xy hold each x-row of the X-to-Y distances in
    ascending order, which lets the y-loop start at the first admissible
    index instead of scanning the whole row.
    """
    cdef Py_ssize_t nx = dist_xx.shape[0]
    cdef Py_ssize_t ny = kmat.shape[1]
    cdef Py_ssize_t i1, i2, jj, j, lo, hi, mid
    cdef double d12, thresh, best = 0.0, pair_best, v, re, im
    for i1 in range(nx):
        for i2 in range(nx):
            d12 = dist_xx[i1, i2]
            if d12 <= 0.0:
                continue
            thresh = 2.0 * d12
            lo = 0
            hi = ny
            while lo < hi:
                mid = (lo + hi) >> 1
                if dist_xy_sorted[i1, mid] < thresh:
                    lo = mid + 1
                else:
                    hi = mid
            pair_best = 0.0
            for jj in range(lo, ny):
                j = order_xy[i1, jj]
                re = kmat[i1, j].real - kmat[i2, j].real
                im = kmat[i1, j].imag - kmat[i2, j].imag
                v = dist_pow_s2[i1, j] * sqrt(re * re + im * im)
                if v > pair_best:
                    pair_best = v
            v = pair_best / pow(d12, s3)
            if v > best:
                best = v
    return best


def pair_ratio_max_many(double complex[:, ::1] values,
                        double[:, ::1] inv_omega):
    """Per row of values, max over i<j of |v_i - v_j| * inv_omega[i, j].

    inv_omega is zero wherever the pair is excluded (coincident points).
    """
    cdef Py_ssize_t m = values.shape[0]
    cdef Py_ssize_t n = values.shape[1]
    cdef Py_ssize_t k, i, j
    cdef double best, w, re, im, v
    out = np.zeros(m, dtype=np.float64)
    cdef double[::1] out_v = out
    for k in range(m):
        best = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                w = inv_omega[i, j]
                if w == 0.0:
                    continue
                re = values[k, i].real - values[k, j].real
                im = values[k, i].imag - values[k, j].imag
                v = sqrt(re * re + im * im) * w
                if v > best:
                    best = v
        out_v[k] = best
    return out
