# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled merged-grid kernels; same contracts as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t

cnp.import_array()


def merge_float(a, b):
    cdef const double[::1] av = np.ascontiguousarray(a, dtype=np.float64)
    cdef const double[::1] bv = np.ascontiguousarray(b, dtype=np.float64)
    cdef Py_ssize_t ka = av.shape[0], kb = bv.shape[0]
    ia_arr = np.empty(ka + kb, dtype=np.int64)
    ib_arr = np.empty(ka + kb, dtype=np.int64)
    w_arr = np.empty(ka + kb, dtype=np.float64)
    cdef int64_t[::1] ia = ia_arr
    cdef int64_t[::1] ib = ib_arr
    cdef double[::1] w = w_arr
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef double x, y, p, prev = 0.0
    while i < ka and j < kb:
        x = av[i]
        y = bv[j]
        p = x if x < y else y
        ia[k] = i
        ib[k] = j
        w[k] = p - prev
        prev = p
        k += 1
        if x == p:
            i += 1
        if y == p:
            j += 1
    return ia_arr[:k], ib_arr[:k], w_arr[:k]


def merge_int(a, b, int64_t denom):
    cdef const int64_t[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef const int64_t[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t ka = av.shape[0], kb = bv.shape[0]
    ia_arr = np.empty(ka + kb, dtype=np.int64)
    ib_arr = np.empty(ka + kb, dtype=np.int64)
    w_arr = np.empty(ka + kb, dtype=np.float64)
    cdef int64_t[::1] ia = ia_arr
    cdef int64_t[::1] ib = ib_arr
    cdef double[::1] w = w_arr
    cdef Py_ssize_t i = 0, j = 0, k = 0
    cdef int64_t x, y, p, prev = 0
    cdef double dd = <double>denom
    while i < ka and j < kb:
        x = av[i]
        y = bv[j]
        p = x if x < y else y
        ia[k] = i
        ib[k] = j
        w[k] = <double>(p - prev) / dd
        prev = p
        k += 1
        if x == p:
            i += 1
        if y == p:
            j += 1
    return ia_arr[:k], ib_arr[:k], w_arr[:k]


def part_sums(va, vb, ia, ib, w, int power=2):
    cdef const double[::1] a = np.ascontiguousarray(va, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(vb, dtype=np.float64)
    cdef const int64_t[::1] ii = np.ascontiguousarray(ia, dtype=np.int64)
    cdef const int64_t[::1] jj = np.ascontiguousarray(ib, dtype=np.int64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t k, n = ww.shape[0]
    cdef double d, pos = 0.0, neg = 0.0
    for k in range(n):
        d = a[ii[k]] - b[jj[k]]
        if power == 2:
            if d > 0:
                pos += ww[k] * d * d
            elif d < 0:
                neg += ww[k] * d * d
        else:
            if d > 0:
                pos += ww[k] * d
            elif d < 0:
                neg -= ww[k] * d
    return pos, neg


def batch_part_sums(VA, VB, ia, ib, w):
    cdef const double[:, ::1] A = np.ascontiguousarray(VA, dtype=np.float64)
    cdef const double[:, ::1] Bm = np.ascontiguousarray(VB, dtype=np.float64)
    cdef const int64_t[::1] ii = np.ascontiguousarray(ia, dtype=np.int64)
    cdef const int64_t[::1] jj = np.ascontiguousarray(ib, dtype=np.int64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t r, k, rows = A.shape[0], n = ww.shape[0]
    pos_arr = np.zeros(rows, dtype=np.float64)
    neg_arr = np.zeros(rows, dtype=np.float64)
    cdef double[::1] pos = pos_arr
    cdef double[::1] neg = neg_arr
    cdef double d, sp, sn
    for r in range(rows):
        sp = 0.0
        sn = 0.0
        for k in range(n):
            d = A[r, ii[k]] - Bm[r, jj[k]]
            if d > 0:
                sp += ww[k] * d * d
            elif d < 0:
                sn += ww[k] * d * d
        pos[r] = sp
        neg[r] = sn
    return pos_arr, neg_arr
