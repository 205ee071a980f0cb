"""Edge-weight learning by majorization-minimization.

The objective over the upper-triangular edge vector ``w`` is::

    f(w) = 2 w.d - delta * sum_j log((T w)_j) + gamma * ||w||^2

where ``d`` holds the matching pairwise distances and ``(T w)_j`` is the
weighted degree of node ``j``. Each iteration linearises the log-degree
barrier through Jensen's inequality, which decouples the edges, and solves
the resulting scalar quadratics in closed form.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DegenerateGraphError
from .graph import WeightedGraph, pairwise_distances, symmetric_from_edges
from .signals import minmax_columns

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LearnConfig:
    delta: float = 1.0
    gamma: float = 0.5
    epsilon: float = 1e-6
    max_iter: int = 500

    def __post_init__(self):
        if not (self.delta > 0 and self.gamma > 0 and self.epsilon > 0):
            raise ValueError("delta, gamma and epsilon must all be positive")
        if int(self.max_iter) < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class EdgeVectorization:
    """Row-major upper-triangular edge indexing for an ``n``-node complete graph."""

    n: int
    rows: np.ndarray = field(init=False, repr=False)
    cols: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        rows, cols = np.triu_indices(self.n, 1)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "cols", cols)

    @property
    def r(self) -> int:
        return self.n * (self.n - 1) // 2

    def vectorize(self, M: np.ndarray) -> np.ndarray:
        return np.asarray(M)[self.rows, self.cols]

    def degrees(self, w: np.ndarray) -> np.ndarray:
        """T w, the weighted degree of every node."""
        return (np.bincount(self.rows, weights=w, minlength=self.n)
                + np.bincount(self.cols, weights=w, minlength=self.n))

    def incidence(self) -> np.ndarray:
        """Dense binary ``n x r`` matrix T with T @ w == W @ 1."""
        T = np.zeros((self.n, self.r))
        e = np.arange(self.r)
        T[self.rows, e] = 1.0
        T[self.cols, e] = 1.0
        return T


def _degrees(w: np.ndarray, T) -> np.ndarray:
    if isinstance(T, EdgeVectorization):
        return T.degrees(w)
    return np.asarray(T) @ w


def objective(w, d, cfg: LearnConfig, T) -> float:
    """f(w) = 2 w.d - delta * 1.log(T w) + gamma * ||w||^2.

    ``T`` may be a dense incidence matrix or an :class:`EdgeVectorization`.
    """
    w = np.asarray(w, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    deg = _degrees(w, T)
    if np.any(deg <= 0):
        raise DegenerateGraphError("log barrier undefined: some node has zero degree")
    return float(2.0 * w @ d - cfg.delta * np.sum(np.log(deg)) + cfg.gamma * (w @ w))


def surrogate_coeffs(w, T, delta: float) -> np.ndarray:
    """c_e = delta * (w_e / deg(j1) + w_e / deg(j2)) for edge e = (j1, j2)."""
    w = np.asarray(w, dtype=np.float64)
    if isinstance(T, EdgeVectorization):
        deg = T.degrees(w)
        if np.any(deg <= 0):
            raise DegenerateGraphError("zero degree: surrogate undefined")
        return delta * w * (1.0 / deg[T.rows] + 1.0 / deg[T.cols])
    T = np.asarray(T)
    deg = T @ w
    if np.any(deg <= 0):
        raise DegenerateGraphError("zero degree: surrogate undefined")
    return delta * w * ((1.0 / deg) @ T)


def mm_update(w, d, c, gamma: float) -> np.ndarray:
    """Closed-form minimiser of 2 d w - c log w + gamma w^2, edge by edge."""
    d = np.asarray(d, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    return (-2.0 * d + np.sqrt(4.0 * d * d + 8.0 * gamma * c)) / (4.0 * gamma)


@dataclass
class LearnResult:
    graph: WeightedGraph
    w: np.ndarray
    iterations: int
    converged: bool
    trace: list[tuple[int, float]]


def learn_edge_vector(d: np.ndarray, n: int, cfg: LearnConfig = LearnConfig()) -> LearnResult:
    """Run the MM iterations from w = 1 on a distance edge vector ``d``."""
    if n < 2:
        raise DegenerateGraphError("learning needs at least two nodes")
    ev = EdgeVectorization(n)
    d = np.asarray(d, dtype=np.float64)
    w = np.ones(ev.r)
    f_prev = objective(w, d, cfg, ev)
    trace = [(0, f_prev)]
    converged = False
    k = 0
    for k in range(1, int(cfg.max_iter) + 1):
        c = surrogate_coeffs(w, ev, cfg.delta)
        w = mm_update(w, d, c, cfg.gamma)
        try:
            f = objective(w, d, cfg, ev)
        except DegenerateGraphError as exc:
            raise ConvergenceError(f"iteration {k}: {exc}") from exc
        if not math.isfinite(f):
            raise ConvergenceError(f"iteration {k}: objective is not finite ({f})")
        trace.append((k, f))
        denom = abs(f_prev)
        rel = abs(f_prev - f) / denom if denom > 0 else abs(f_prev - f)
        f_prev = f
        if rel <= cfg.epsilon:
            converged = True
            break
    if not converged:
        logger.warning("MM learning stopped at max_iter=%d without meeting epsilon=%g", cfg.max_iter, cfg.epsilon)
    W = symmetric_from_edges(w, n)
    return LearnResult(WeightedGraph(W, "learned"), w, k, converged, trace)


def learn_weights(X=None, cfg: LearnConfig = LearnConfig(), *, D=None, scale: bool = True) -> WeightedGraph:
    """Learn a weighted graph from nodal signals ``X`` or a distance matrix ``D``.

    When ``X`` is given its columns are min-max scaled to [0, 1] across nodes
    (``scale=True``) before distances are taken.
    """
    return learn_weights_traced(X, cfg, D=D, scale=scale).graph


def learn_weights_traced(X=None, cfg: LearnConfig = LearnConfig(), *, D=None, scale: bool = True) -> LearnResult:
    if D is None:
        if X is None:
            raise ValueError("pass either X or D")
        Xa = np.asarray(getattr(X, "X", X), dtype=np.float64)
        D = pairwise_distances(minmax_columns(Xa) if scale else Xa)
    D = np.asarray(D, dtype=np.float64)
    n = len(D)
    ev = EdgeVectorization(n)
    return learn_edge_vector(ev.vectorize(D), n, cfg)
