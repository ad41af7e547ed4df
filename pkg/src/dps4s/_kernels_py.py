"""Pure-Python graphlet enumeration kernels.

Same contract as the compiled ``_kernels`` module: every function takes a CSR
adjacency (``indptr``, ``indices`` with each neighbour list sorted ascending)
and returns an ``(k, p)`` int64 array of pattern instances, each listed once.
"""

from __future__ import annotations

import numpy as np


def _neighbours(indptr, indices):
    return [indices[indptr[v]: indptr[v + 1]].tolist() for v in range(len(indptr) - 1)]


def _pack(rows, width):
    if not rows:
        return np.zeros((0, width), dtype=np.int64)
    return np.asarray(rows, dtype=np.int64)


def triangles(indptr, indices):
    """Rows (u, v, w) with u < v < w, all three pairs adjacent."""
    adj = _neighbours(indptr, indices)
    sets = [set(a) for a in adj]
    out = []
    for u, nu in enumerate(adj):
        for v in nu:
            if v <= u:
                continue
            for w in adj[v]:
                if w > v and w in sets[u]:
                    out.append((u, v, w))
    return _pack(out, 3)


def path2(indptr, indices):
    """Rows (a, b, c): b is the centre, a < c."""
    adj = _neighbours(indptr, indices)
    out = []
    for b, nb in enumerate(adj):
        for i in range(len(nb)):
            for j in range(i + 1, len(nb)):
                out.append((nb[i], b, nb[j]))
    return _pack(out, 3)


def path3(indptr, indices):
    """Rows (a, b, c, d) along the path; the middle edge has b < c."""
    adj = _neighbours(indptr, indices)
    out = []
    for b, nb in enumerate(adj):
        for c in nb:
            if c <= b:
                continue
            for a in nb:
                if a == c:
                    continue
                for d in adj[c]:
                    if d != b and d != a:
                        out.append((a, b, c, d))
    return _pack(out, 4)


def rectangles(indptr, indices):
    """Rows (a, b, c, d) around a 4-cycle; a is the smallest vertex and b < d."""
    adj = _neighbours(indptr, indices)
    sets = [set(x) for x in adj]
    out = []
    for a, na in enumerate(adj):
        higher = [x for x in na if x > a]
        for i in range(len(higher)):
            b = higher[i]
            for j in range(i + 1, len(higher)):
                d = higher[j]
                for c in adj[b]:
                    if c > a and c != d and c in sets[d]:
                        out.append((a, b, c, d))
    return _pack(out, 4)


def fanout2(indptr, indices):
    """Rows (x, y, z) for out-edges x->y and x->z with y < z."""
    return path2(indptr, indices)[:, [1, 0, 2]]
