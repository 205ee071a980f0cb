"""Vertex-domain and spectral graph features, and multi-level fusion.

Conventions
-----------
* Edge length for path metrics is ``1 / w``; zero-weight pairs are not edges.
* Unreachable pairs: efficiency terms use 0; distance-valued metrics (CC,
  Ecc, CPL) replace the infinite distance by twice the largest finite
  off-diagonal distance of the graph (0 when there is none).
* Local clustering is the geometric-mean triangle intensity on weights
  normalised by the largest weight.
* Betweenness is unnormalised, counting each unordered node pair once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import WeightedGraph, laplacian

LOCAL_NAMES = ("LE", "LCC", "NS", "NBC", "CC", "Ecc")
GLOBAL_NAMES = ("CPL", "GE", "GCC", "D", "GA")
SPECTRAL_NAMES = ("energy", "power", "entropy", "amplitude")


def f1_length(n: int) -> int:
    return 6 * n + 5


def f2_length(n: int) -> int:
    return n + 4


def edge_lengths(W: np.ndarray) -> np.ndarray:
    W = np.asarray(W, dtype=np.float64)
    with np.errstate(divide="ignore"):
        L = np.where(W > 0, 1.0 / np.where(W > 0, W, 1.0), np.inf)
    np.fill_diagonal(L, 0.0)
    return np.ascontiguousarray(L)


def shortest_paths(g: WeightedGraph) -> np.ndarray:
    return _kernels.all_pairs_shortest(edge_lengths(g.W))


def _finite_distances(dist: np.ndarray) -> np.ndarray:
    """Copy of ``dist`` with unreachable pairs replaced by 2 x the largest finite distance."""
    n = dist.shape[0]
    off = ~np.eye(n, dtype=bool)
    finite = dist[off & np.isfinite(dist)]
    penalty = 2.0 * finite.max() if finite.size else 0.0
    return np.where(np.isfinite(dist), dist, penalty)


def clustering(W: np.ndarray) -> np.ndarray:
    """Weighted local clustering (geometric mean of normalised triangle weights)."""
    W = np.asarray(W, dtype=np.float64)
    n = W.shape[0]
    wmax = W.max(initial=0.0)
    if wmax <= 0:
        return np.zeros(n)
    cube = np.cbrt(W / wmax)
    cycles = np.einsum("ij,jk,ki->i", cube, cube, cube)
    k = np.count_nonzero(W > 0, axis=1)
    denom = k * (k - 1.0)
    return np.where(denom > 0, cycles / np.where(denom > 0, denom, 1.0), 0.0)


def assortativity(W: np.ndarray) -> tuple[float, bool]:
    """Pearson correlation of node strengths across edge endpoints.

    Returns ``(value, defined)``; ``defined`` is False (and the value 0)
    when the strengths seen at edge endpoints have zero variance.
    """
    W = np.asarray(W, dtype=np.float64)
    s = W.sum(axis=1)
    i, j = np.nonzero(np.triu(W, 1))
    if i.size == 0:
        return 0.0, False
    x = np.concatenate([s[i], s[j]])
    y = np.concatenate([s[j], s[i]])
    xc = x - x.mean()
    yc = y - y.mean()
    if np.sqrt(np.mean(xc * xc)) <= 1e-12 * max(1.0, abs(float(x.mean()))):
        return 0.0, False
    var = np.sqrt(np.sum(xc * xc) * np.sum(yc * yc))
    return float(np.sum(xc * yc) / var), True


def local_metrics(g: WeightedGraph) -> np.ndarray:
    """n x 6 matrix of [LE, LCC, NS, NBC, CC, Ecc] per node."""
    n = g.n
    L = edge_lengths(g.W)
    dist = _finite_distances(_kernels.all_pairs_shortest(L))
    out = np.zeros((n, 6))
    out[:, 0] = _kernels.local_efficiency(L)
    out[:, 1] = clustering(g.W)
    out[:, 2] = g.W.sum(axis=1)
    out[:, 3] = _kernels.betweenness(L)
    total = dist.sum(axis=1)
    out[:, 4] = np.where(total > 0, (n - 1) / np.where(total > 0, total, 1.0), 0.0)
    out[:, 5] = dist.max(axis=1) if n else 0.0
    return out


def global_metrics(g: WeightedGraph, local: np.ndarray | None = None) -> np.ndarray:
    """[CPL, GE, GCC, D, GA] for the whole graph."""
    n = g.n
    if n < 2:
        return np.zeros(5)
    raw = shortest_paths(g)
    off = ~np.eye(n, dtype=bool)
    dist = _finite_distances(raw)
    cpl = dist[off].mean()
    pair = raw[off]
    ge = np.mean(np.where(np.isfinite(pair), 1.0 / np.where(pair > 0, pair, 1.0), 0.0))
    lcc = local[:, 1] if local is not None else clustering(g.W)
    r = n * (n - 1) / 2
    density = np.count_nonzero(np.triu(g.W, 1) > 0) / r
    ga, _ = assortativity(g.W)
    return np.array([cpl, ge, lcc.mean(), density, ga])


def gft_basis(g: WeightedGraph) -> tuple[np.ndarray, np.ndarray]:
    """Laplacian eigenpairs sorted ascending.

    Each eigenvector's sign is fixed so its largest-magnitude entry is positive.
    """
    lam, U = np.linalg.eigh(laplacian(g))
    order = np.argsort(lam, kind="stable")
    lam, U = lam[order], U[:, order]
    if U.size:
        pivot = np.argmax(np.abs(U), axis=0)
        signs = np.sign(U[pivot, np.arange(U.shape[1])])
        U = U * np.where(signs == 0, 1.0, signs)
    return lam, U


def gft(g: WeightedGraph, signal) -> np.ndarray:
    x = np.asarray(signal, dtype=np.float64)
    if x.shape != (g.n,):
        raise ValueError(f"signal must have length {g.n}, got shape {x.shape}")
    _, U = gft_basis(g)
    return U.T @ x


def igft(g: WeightedGraph, coeffs) -> np.ndarray:
    _, U = gft_basis(g)
    return U @ np.asarray(coeffs, dtype=np.float64)


def spectral_features(coeffs) -> np.ndarray:
    """[energy, power, entropy, amplitude] of GFT coefficients."""
    c = np.asarray(coeffs, dtype=np.float64)
    energy = float(np.sum(c * c))
    if energy == 0.0 or c.size == 0:
        return np.zeros(4)
    p = c * c / energy
    nz = p[p > 0]
    entropy = float(-np.sum(nz * np.log(nz)))
    return np.array([energy, energy / c.size, entropy, float(np.max(np.abs(c)))])


@dataclass(frozen=True)
class GraphFeatureVector:
    values: np.ndarray
    level_n: int
    kind: str

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.f1_len + self.f2_len,):
            raise ValueError(f"expected {self.f1_len + self.f2_len} values for n={self.level_n}, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("graph feature vector contains NaN or Inf")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def f1_len(self) -> int:
        return f1_length(self.level_n)

    @property
    def f2_len(self) -> int:
        return f2_length(self.level_n)

    @property
    def tag(self) -> str:
        return f"level-{self.level_n}"


def scalar_signal(signal_matrix) -> np.ndarray:
    """Reduce each node's descriptor row to its mean."""
    X = np.asarray(getattr(signal_matrix, "X", signal_matrix), dtype=np.float64)
    return X.mean(axis=1)


def graph_feature_vector(g: WeightedGraph, signal_matrix, kind: str | None = None) -> GraphFeatureVector:
    """[local metrics row-major | global metrics | GFT coefficients | spectral features]."""
    X = np.asarray(getattr(signal_matrix, "X", signal_matrix))
    if X.shape[0] != g.n:
        raise ValueError(f"signal matrix has {X.shape[0]} rows, graph has {g.n} nodes")
    kind = kind or getattr(signal_matrix, "kind", "unknown")
    local = local_metrics(g)
    glob = global_metrics(g, local)
    coeffs = gft(g, scalar_signal(X))
    values = np.concatenate([local.ravel(), glob, coeffs, spectral_features(coeffs)])
    return GraphFeatureVector(values, g.n, kind)


@dataclass(frozen=True)
class FusedFeatureVector:
    """Concatenated features with ``(tag, offset, length)`` provenance blocks."""

    values: np.ndarray
    layout: tuple[tuple[str, int, int], ...]

    def __post_init__(self):
        offset = 0
        for _, start, length in self.layout:
            if start != offset:
                raise ValueError("layout blocks must be contiguous and ordered")
            offset += length
        if offset != len(self.values):
            raise ValueError("layout does not cover the feature vector")

    def column_tags(self) -> list[str]:
        tags = []
        for tag, _, length in self.layout:
            tags.extend([tag] * length)
        return tags


def fuse_levels(per_level: Sequence[GraphFeatureVector], conventional=None,
                expected_levels: Sequence[int] | None = None) -> FusedFeatureVector:
    """Concatenate per-level graph features in level order, then the conventional block."""
    if expected_levels is not None and [v.level_n for v in per_level] != list(expected_levels):
        raise ValueError(f"levels {[v.level_n for v in per_level]} do not match configured {list(expected_levels)}")
    blocks, layout, offset = [], [], 0
    for v in per_level:
        blocks.append(v.values)
        layout.append((v.tag, offset, v.values.size))
        offset += v.values.size
    conv = np.asarray(conventional if conventional is not None else [], dtype=np.float64)
    if conv.size:
        blocks.append(conv)
        layout.append(("conventional", offset, conv.size))
    values = np.concatenate(blocks) if blocks else np.zeros(0)
    return FusedFeatureVector(values, tuple(layout))
