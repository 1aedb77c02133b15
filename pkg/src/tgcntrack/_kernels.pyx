# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: rectangular Hungarian solve and pairwise IoU."""
import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


def solve_assignment(cost):
    cdef cnp.ndarray[cnp.float64_t, ndim=2] c = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    cdef Py_ssize_t m = c.shape[1] if c.ndim == 2 else 0
    if n == 0 or m == 0:
        return [-1] * n
    cdef bint transposed = n > m
    if transposed:
        c = np.ascontiguousarray(c.T)
        n, m = m, n
    col_of_row = _sap(c, n, m)
    if not transposed:
        return col_of_row
    out = [-1] * m
    for i, j in enumerate(col_of_row):
        if j >= 0:
            out[j] = i
    return out


cdef list _sap(double[:, ::1] c, Py_ssize_t n, Py_ssize_t m):
    cdef double[::1] u = np.zeros(n + 1)
    cdef double[::1] v = np.zeros(m + 1)
    cdef double[::1] minv = np.empty(m + 1)
    cdef Py_ssize_t[::1] p = np.zeros(m + 1, dtype=np.intp)
    cdef Py_ssize_t[::1] way = np.zeros(m + 1, dtype=np.intp)
    cdef unsigned char[::1] used = np.zeros(m + 1, dtype=np.uint8)
    cdef Py_ssize_t i, j, j0, j1, i0
    cdef double delta, cur, cij, ui
    cdef bint found
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        for j in range(m + 1):
            minv[j] = INFINITY
            used[j] = 0
        found = True
        while True:
            used[j0] = 1
            i0 = p[j0]
            delta = INFINITY
            j1 = -1
            ui = u[i0]
            for j in range(1, m + 1):
                if not used[j]:
                    cij = c[i0 - 1, j - 1]
                    if cij != INFINITY:
                        cur = cij - ui - v[j]
                        if cur < minv[j]:
                            minv[j] = cur
                            way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            if j1 < 0:
                found = False
                break
            for j in range(m + 1):
                if used[j]:
                    u[p[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        if not found:
            continue
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = [-1] * n
    for j in range(1, m + 1):
        if p[j]:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row


cdef inline double _overlap(double a0, double aw, double b0, double bw) nogil:
    # contained intervals return their own width, so identical boxes give exactly 1
    if a0 >= b0 and a0 + aw <= b0 + bw:
        return aw
    if b0 >= a0 and b0 + bw <= a0 + aw:
        return bw
    return min(a0 + aw, b0 + bw) - max(a0, b0)


def iou_matrix(a, b):
    cdef double[:, ::1] aa = np.ascontiguousarray(a, dtype=np.float64).reshape(-1, 4)
    cdef double[:, ::1] bb = np.ascontiguousarray(b, dtype=np.float64).reshape(-1, 4)
    cdef Py_ssize_t n = aa.shape[0], m = bb.shape[0], i, j
    out_arr = np.zeros((n, m))
    cdef double[:, ::1] out = out_arr
    cdef double iw, ih, inter
    for i in range(n):
        for j in range(m):
            iw = _overlap(aa[i, 0], aa[i, 2], bb[j, 0], bb[j, 2])
            ih = _overlap(aa[i, 1], aa[i, 3], bb[j, 1], bb[j, 3])
            if iw <= 0 or ih <= 0:
                continue
            inter = iw * ih
            out[i, j] = inter / (aa[i, 2] * aa[i, 3] + bb[j, 2] * bb[j, 3] - inter)
    return out_arr
