# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled graphlet enumeration kernels.

Mirrors ``_kernels_py`` exactly, including row layout and enumeration order.
"""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector

cnp.import_array()

ctypedef cnp.int64_t i64


cdef object _pack(vector[i64]& buf, int width):
    cdef Py_ssize_t k = buf.size() // width
    out = np.empty((k, width), dtype=np.int64)
    cdef i64[:, ::1] view = out
    cdef Py_ssize_t r, c
    for r in range(k):
        for c in range(width):
            view[r, c] = buf[r * width + c]
    return out


def triangles(const i64[::1] indptr, const i64[::1] indices):
    cdef Py_ssize_t nv = indptr.shape[0] - 1
    cdef vector[i64] buf
    cdef i64[::1] mark = np.full(nv, -1, dtype=np.int64)
    cdef i64 u, v, w, i, j
    for u in range(nv):
        for i in range(indptr[u], indptr[u + 1]):
            mark[indices[i]] = u
        for i in range(indptr[u], indptr[u + 1]):
            v = indices[i]
            if v <= u:
                continue
            for j in range(indptr[v], indptr[v + 1]):
                w = indices[j]
                if w > v and mark[w] == u:
                    buf.push_back(u)
                    buf.push_back(v)
                    buf.push_back(w)
    return _pack(buf, 3)


def path2(const i64[::1] indptr, const i64[::1] indices):
    cdef Py_ssize_t nv = indptr.shape[0] - 1
    cdef vector[i64] buf
    cdef i64 b, i, j
    for b in range(nv):
        for i in range(indptr[b], indptr[b + 1]):
            for j in range(i + 1, indptr[b + 1]):
                buf.push_back(indices[i])
                buf.push_back(b)
                buf.push_back(indices[j])
    return _pack(buf, 3)


def path3(const i64[::1] indptr, const i64[::1] indices):
    cdef Py_ssize_t nv = indptr.shape[0] - 1
    cdef vector[i64] buf
    cdef i64 a, b, c, d, i, j, k
    for b in range(nv):
        for i in range(indptr[b], indptr[b + 1]):
            c = indices[i]
            if c <= b:
                continue
            for j in range(indptr[b], indptr[b + 1]):
                a = indices[j]
                if a == c:
                    continue
                for k in range(indptr[c], indptr[c + 1]):
                    d = indices[k]
                    if d != b and d != a:
                        buf.push_back(a)
                        buf.push_back(b)
                        buf.push_back(c)
                        buf.push_back(d)
    return _pack(buf, 4)


def rectangles(const i64[::1] indptr, const i64[::1] indices):
    cdef Py_ssize_t nv = indptr.shape[0] - 1
    cdef vector[i64] buf
    cdef i64[::1] mark = np.full(nv, -1, dtype=np.int64)
    cdef i64 a, b, c, d, i, j, k, p
    for a in range(nv):
        for i in range(indptr[a], indptr[a + 1]):
            b = indices[i]
            if b <= a:
                continue
            for j in range(i + 1, indptr[a + 1]):
                d = indices[j]
                # neighbour lists are sorted, so d > b > a here
                for p in range(indptr[d], indptr[d + 1]):
                    mark[indices[p]] = d
                for k in range(indptr[b], indptr[b + 1]):
                    c = indices[k]
                    if c > a and c != d and mark[c] == d:
                        buf.push_back(a)
                        buf.push_back(b)
                        buf.push_back(c)
                        buf.push_back(d)
                for p in range(indptr[d], indptr[d + 1]):
                    mark[indices[p]] = -1
    return _pack(buf, 4)


def fanout2(const i64[::1] indptr, const i64[::1] indices):
    return path2(indptr, indices)[:, [1, 0, 2]]
