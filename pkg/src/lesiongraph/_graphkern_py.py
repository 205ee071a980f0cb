"""Pure-Python twins of the compiled kernels in ``_graphkern.pyx``.

Same inputs, same outputs, same tie rule. Used when the extension is not
built or when ``LESIONGRAPH_PURE_PYTHON=1`` is set.
"""

from __future__ import annotations

import heapq

import numpy as np

TIE_RTOL = 1e-10


def _same(a: float, b: float) -> bool:
    return abs(a - b) <= TIE_RTOL * max(abs(a), abs(b))


def _floyd_warshall(D: np.ndarray) -> np.ndarray:
    for k in range(D.shape[0]):
        np.minimum(D, D[:, k, None] + D[None, k, :], out=D)
    return D


def all_pairs_shortest(L: np.ndarray) -> np.ndarray:
    return _floyd_warshall(np.array(L, dtype=np.float64, copy=True))


def betweenness(L: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    nbrs = [[(v, float(L[u, v])) for v in np.flatnonzero(np.isfinite(L[u])) if v != u] for u in range(n)]
    bc = [0.0] * n
    for s in range(n):
        dist = [float("inf")] * n
        sigma = [0.0] * n
        preds: list[list[int]] = [[] for _ in range(n)]
        done = [False] * n
        order = []
        dist[s] = 0.0
        sigma[s] = 1.0
        heap = [(0.0, s)]
        while heap:
            d_u, u = heapq.heappop(heap)
            if done[u] or d_u > dist[u]:
                continue
            done[u] = True
            order.append(u)
            for v, luv in nbrs[u]:
                if done[v]:
                    continue
                alt = d_u + luv
                if dist[v] == float("inf") or (alt < dist[v] and not _same(alt, dist[v])):
                    dist[v] = alt
                    sigma[v] = sigma[u]
                    preds[v] = [u]
                    heapq.heappush(heap, (alt, v))
                elif _same(alt, dist[v]):
                    sigma[v] += sigma[u]
                    preds[v].append(u)
        delta = [0.0] * n
        for w in reversed(order):
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                bc[w] += delta[w]
    return np.asarray(bc) * 0.5


def local_efficiency(L: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    out = np.zeros(n)
    finite = np.isfinite(L)
    for i in range(n):
        nbr = np.flatnonzero(finite[i])
        nbr = nbr[nbr != i]
        k = nbr.size
        if k < 2:
            continue
        sub = _floyd_warshall(L[np.ix_(nbr, nbr)].copy())
        off = ~np.eye(k, dtype=bool)
        vals = sub[off]
        out[i] = np.sum(1.0 / vals[np.isfinite(vals)]) / (k * (k - 1))
    return out
