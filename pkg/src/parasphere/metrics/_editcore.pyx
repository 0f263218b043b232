# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled edit-distance kernels; exact twin of the pure-Python module.

Same signatures, same integer results: only the constant factor changes.
"""

import numpy as np

cimport cython
from libc.stdint cimport int64_t


def levenshtein(a, b):
    """Unit-cost edit distance between two id sequences (two-row DP)."""
    cdef int64_t[::1] av = np.ascontiguousarray(a, dtype=np.int64)
    cdef int64_t[::1] bv = np.ascontiguousarray(b, dtype=np.int64)
    cdef Py_ssize_t la = av.shape[0]
    cdef Py_ssize_t lb = bv.shape[0]
    cdef int64_t[::1] prev = np.arange(lb + 1, dtype=np.int64)
    cdef int64_t[::1] cur = np.zeros(lb + 1, dtype=np.int64)
    cdef int64_t[::1] tmp
    cdef Py_ssize_t i, j
    cdef int64_t ai, cost, best
    for i in range(1, la + 1):
        cur[0] = i
        ai = av[i - 1]
        for j in range(1, lb + 1):
            cost = 0 if ai == bv[j - 1] else 1
            best = prev[j] + 1
            if cur[j - 1] + 1 < best:
                best = cur[j - 1] + 1
            if prev[j - 1] + cost < best:
                best = prev[j - 1] + cost
            cur[j] = best
        tmp = prev
        prev = cur
        cur = tmp
    return int(prev[lb])


def ted_kernel(labels1, lmld1, kr1, labels2, lmld2, kr2):
    """Ordered tree edit distance, unit costs (classic keyroot DP).

    Arrays are 1-indexed (slot 0 unused): labels[i] is the interned label of
    the i-th node in postorder, lmld[i] its leftmost leaf descendant, kr the
    ascending keyroot indices.
    """
    cdef int64_t[::1] L1 = np.ascontiguousarray(labels1, dtype=np.int64)
    cdef int64_t[::1] M1 = np.ascontiguousarray(lmld1, dtype=np.int64)
    cdef int64_t[::1] K1 = np.ascontiguousarray(kr1, dtype=np.int64)
    cdef int64_t[::1] L2 = np.ascontiguousarray(labels2, dtype=np.int64)
    cdef int64_t[::1] M2 = np.ascontiguousarray(lmld2, dtype=np.int64)
    cdef int64_t[::1] K2 = np.ascontiguousarray(kr2, dtype=np.int64)
    cdef Py_ssize_t n1 = L1.shape[0] - 1
    cdef Py_ssize_t n2 = L2.shape[0] - 1

    td_arr = np.zeros((n1 + 1, n2 + 1), dtype=np.int64)
    fd_arr = np.zeros((n1 + 2, n2 + 2), dtype=np.int64)
    cdef int64_t[:, ::1] td = td_arr
    cdef int64_t[:, ::1] fd = fd_arr

    cdef Py_ssize_t a, b, x, y, m, n
    cdef int64_t i, j, li, lj, xi, yj, cost, best
    for a in range(K1.shape[0]):
        i = K1[a]
        li = M1[i]
        m = i - li + 2
        for b in range(K2.shape[0]):
            j = K2[b]
            lj = M2[j]
            n = j - lj + 2
            fd[0, 0] = 0
            for x in range(1, m):
                fd[x, 0] = fd[x - 1, 0] + 1
            for y in range(1, n):
                fd[0, y] = fd[0, y - 1] + 1
            for x in range(1, m):
                xi = x + li - 1
                for y in range(1, n):
                    yj = y + lj - 1
                    if M1[xi] == li and M2[yj] == lj:
                        cost = 0 if L1[xi] == L2[yj] else 1
                        best = fd[x - 1, y] + 1
                        if fd[x, y - 1] + 1 < best:
                            best = fd[x, y - 1] + 1
                        if fd[x - 1, y - 1] + cost < best:
                            best = fd[x - 1, y - 1] + cost
                        fd[x, y] = best
                        td[xi, yj] = best
                    else:
                        best = fd[x - 1, y] + 1
                        if fd[x, y - 1] + 1 < best:
                            best = fd[x, y - 1] + 1
                        if fd[M1[xi] - li, M2[yj] - lj] + td[xi, yj] < best:
                            best = fd[M1[xi] - li, M2[yj] - lj] + td[xi, yj]
                        fd[x, y] = best
    return int(td[n1, n2])
