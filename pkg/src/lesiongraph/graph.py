"""Weighted superpixel graphs: Gaussian-kernel weights, pruning and Laplacians."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGraphError

BASE_SCHEMES = ("gaussian", "learned")


@dataclass(frozen=True)
class WeightedGraph:
    """Simple undirected graph stored as a dense symmetric weight matrix.

    ``scheme`` is ``"gaussian"``, ``"learned"`` or ``"pruned(<tau>,<base>)"``.
    """

    W: np.ndarray
    scheme: str = "gaussian"

    def __post_init__(self):
        W = np.array(self.W, dtype=np.float64)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"weight matrix must be square, got {W.shape}")
        if not np.all(np.isfinite(W)):
            raise ValueError("weight matrix contains NaN or Inf")
        if np.any(W < 0):
            raise ValueError("weights must be non-negative")
        if np.any(np.diag(W) != 0):
            raise ValueError("diagonal must be zero (no self-loops)")
        if not np.array_equal(W, W.T):
            raise ValueError("weight matrix must be symmetric")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def base_scheme(self) -> str:
        if self.scheme.startswith("pruned("):
            return self.scheme[len("pruned("):-1].split(",", 1)[1]
        return self.scheme

    def edge_vector(self) -> np.ndarray:
        """Upper-triangular weights in row-major order (length n(n-1)/2)."""
        iu = np.triu_indices(self.n, 1)
        return self.W[iu]


@dataclass(frozen=True)
class GaussianParams:
    mu: float
    sigma2: float

    def __post_init__(self):
        if not self.sigma2 > 0:
            raise DegenerateGraphError("sigma2 must be positive")


def pairwise_distances(X) -> np.ndarray:
    """Euclidean distances between the rows of ``X`` (or of ``X.X`` for a signal matrix)."""
    X = np.asarray(getattr(X, "X", X), dtype=np.float64)
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(D, 0.0)
    return D


def symmetric_from_edges(w: np.ndarray, n: int) -> np.ndarray:
    W = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    W[iu] = w
    return W + W.T


def gaussian_params(D: np.ndarray) -> GaussianParams:
    d = np.asarray(D)[np.triu_indices(len(D), 1)]
    if d.size == 0:
        raise DegenerateGraphError("a Gaussian graph needs at least two nodes")
    mu = float(d.mean())
    sigma2 = float(np.mean((d - mu) ** 2))
    if not sigma2 > 0:
        raise DegenerateGraphError(
            "all pairwise distances are equal (sigma^2 = 0): the nodes are degenerate "
            "and the Gaussian kernel is undefined; use learned weights or different signals")
    return GaussianParams(mu, sigma2)


def gaussian_weights(D: np.ndarray, params: GaussianParams | None = None) -> WeightedGraph:
    """w_ij = exp(-(d_ij - mu)^2 / (2 sigma^2)).

    ``mu`` and ``sigma^2`` are the mean and population variance of the
    off-diagonal distances. The kernel peaks at the *mean* distance, not at
    zero distance.
    """
    D = np.asarray(D, dtype=np.float64)
    p = params or gaussian_params(D)
    n = len(D)
    d = D[np.triu_indices(n, 1)]
    w = np.exp(-((d - p.mu) ** 2) / (2.0 * p.sigma2))
    return WeightedGraph(symmetric_from_edges(w, n), "gaussian")


def prune_threshold(w: np.ndarray, tau: float) -> float:
    """Weight of the lowest retained edge when the weakest floor(tau*r) edges go."""
    r = w.size
    removed = int(math.floor(tau * r))
    if removed == 0 or r == 0:
        return -math.inf
    if removed >= r:
        return math.inf
    return float(np.sort(w, kind="stable")[removed])


def prune(g: WeightedGraph, tau: float) -> WeightedGraph:
    """Zero the weakest ``floor(tau * r)`` of the ``r = n(n-1)/2`` edges.

    Edges whose weight equals the threshold are all kept, so slightly fewer
    edges may be removed when ties straddle the cut.
    """
    if not 0.0 <= tau <= 1.0 or math.isnan(tau):
        raise ValueError(f"tau must lie in [0, 1], got {tau}")
    w = g.edge_vector()
    t = prune_threshold(w, tau)
    kept = np.where(w >= t, w, 0.0)
    return WeightedGraph(symmetric_from_edges(kept, g.n), f"pruned({tau:g},{g.base_scheme})")


def laplacian(g: WeightedGraph) -> np.ndarray:
    """Combinatorial Laplacian diag(W 1) - W."""
    W = g.W
    return np.diag(W.sum(axis=1)) - W
