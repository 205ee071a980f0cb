# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled path-based graph kernels.

Every function takes a dense matrix of edge lengths ``L`` (``inf`` where
there is no edge, 0 on the diagonal) and mirrors ``_graphkern_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY, fabs, fmax

cnp.import_array()

cdef double TIE_RTOL = 1e-10


cdef inline bint _same(double a, double b) noexcept nogil:
    return fabs(a - b) <= TIE_RTOL * fmax(fabs(a), fabs(b))


cdef void _floyd_warshall(double[:, ::1] D, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t i, j, k
    cdef double dik, alt
    for k in range(n):
        for i in range(n):
            dik = D[i, k]
            if dik == INFINITY:
                continue
            for j in range(n):
                alt = dik + D[k, j]
                if alt < D[i, j]:
                    D[i, j] = alt


def all_pairs_shortest(double[:, ::1] L):
    cdef Py_ssize_t n = L.shape[0]
    out = np.array(L, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] D = out
    with nogil:
        _floyd_warshall(D, n)
    return out


def betweenness(double[:, ::1] L):
    """Brandes betweenness on a dense weighted graph; each unordered pair counted once."""
    cdef Py_ssize_t n = L.shape[0]
    bc_arr = np.zeros(n, dtype=np.float64)
    dist_arr = np.empty(n, dtype=np.float64)
    sigma_arr = np.empty(n, dtype=np.float64)
    delta_arr = np.empty(n, dtype=np.float64)
    visited_arr = np.empty(n, dtype=np.uint8)
    order_arr = np.empty(n, dtype=np.intp)
    npred_arr = np.empty(n, dtype=np.intp)
    pred_arr = np.empty((n, n), dtype=np.intp)
    cdef double[::1] bc = bc_arr, dist = dist_arr, sigma = sigma_arr, delta = delta_arr
    cdef unsigned char[::1] visited = visited_arr
    cdef Py_ssize_t[::1] order = order_arr, npred = npred_arr
    cdef Py_ssize_t[:, ::1] pred = pred_arr
    cdef Py_ssize_t s, u, v, w, it, p, count
    cdef double best, alt, luv
    with nogil:
        for s in range(n):
            for v in range(n):
                dist[v] = INFINITY
                sigma[v] = 0.0
                delta[v] = 0.0
                visited[v] = 0
                npred[v] = 0
            dist[s] = 0.0
            sigma[s] = 1.0
            count = 0
            for it in range(n):
                u = -1
                best = INFINITY
                for v in range(n):
                    if not visited[v] and dist[v] < best:
                        best = dist[v]
                        u = v
                if u < 0:
                    break
                visited[u] = 1
                order[count] = u
                count += 1
                for v in range(n):
                    if visited[v]:
                        continue
                    luv = L[u, v]
                    if luv == INFINITY:
                        continue
                    alt = dist[u] + luv
                    if dist[v] == INFINITY or (alt < dist[v] and not _same(alt, dist[v])):
                        dist[v] = alt
                        sigma[v] = sigma[u]
                        pred[v, 0] = u
                        npred[v] = 1
                    elif _same(alt, dist[v]):
                        sigma[v] += sigma[u]
                        pred[v, npred[v]] = u
                        npred[v] += 1
            for it in range(count - 1, -1, -1):
                w = order[it]
                for p in range(npred[w]):
                    v = pred[w, p]
                    delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w])
                if w != s:
                    bc[w] += delta[w]
        for v in range(n):
            bc[v] *= 0.5
    return bc_arr


def local_efficiency(double[:, ::1] L):
    """Mean inverse shortest-path length inside each node's neighbourhood subgraph."""
    cdef Py_ssize_t n = L.shape[0]
    out_arr = np.zeros(n, dtype=np.float64)
    nbr_arr = np.empty(n, dtype=np.intp)
    sub_arr = np.empty((n, n), dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef Py_ssize_t[::1] nbr = nbr_arr
    cdef double[:, ::1] sub = sub_arr
    cdef Py_ssize_t i, j, a, b, k
    cdef double total
    with nogil:
        for i in range(n):
            k = 0
            for j in range(n):
                if j != i and L[i, j] != INFINITY:
                    nbr[k] = j
                    k += 1
            if k < 2:
                continue
            for a in range(k):
                for b in range(k):
                    sub[a, b] = L[nbr[a], nbr[b]]
            _floyd_warshall(sub, k)
            total = 0.0
            for a in range(k):
                for b in range(k):
                    if a != b and sub[a, b] != INFINITY:
                        total += 1.0 / sub[a, b]
            out[i] = total / (k * (k - 1))
    return out_arr
