import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lesiongraph.errors import ConvergenceError, DegenerateGraphError
from lesiongraph.graph import pairwise_distances
from lesiongraph.graphlearn import (EdgeVectorization, LearnConfig, learn_edge_vector, learn_weights,
                                    learn_weights_traced, mm_update, objective, surrogate_coeffs)


def test_objective_two_nodes():
    ev = EdgeVectorization(2)
    cfg = LearnConfig(delta=1.0, gamma=1.0)
    assert objective([1.0], [1.0], cfg, ev) == pytest.approx(3.0)
    assert objective([1.0], [1.0], cfg, ev.incidence()) == pytest.approx(3.0)


def test_objective_linear_in_d():
    rng = np.random.default_rng(0)
    ev = EdgeVectorization(6)
    w, d = rng.random(ev.r) + 0.1, rng.random(ev.r)
    cfg = LearnConfig()
    assert objective(w, 2 * d, cfg, ev) - objective(w, d, cfg, ev) == pytest.approx(2 * w @ d)


def test_objective_decreases_with_gamma():
    rng = np.random.default_rng(1)
    ev = EdgeVectorization(5)
    w, d = rng.random(ev.r) + 0.1, rng.random(ev.r)
    assert objective(w, d, LearnConfig(gamma=0.2), ev) < objective(w, d, LearnConfig(gamma=0.8), ev)


def test_incidence_matches_degrees():
    ev = EdgeVectorization(7)
    w = np.random.default_rng(2).random(ev.r)
    np.testing.assert_allclose(ev.incidence() @ w, ev.degrees(w))
    W = np.zeros((7, 7))
    W[ev.rows, ev.cols] = w
    np.testing.assert_allclose(ev.degrees(w), (W + W.T).sum(axis=1))


def test_surrogate_small_cases():
    np.testing.assert_allclose(surrogate_coeffs([1.0], EdgeVectorization(2), 0.7), [1.4])
    np.testing.assert_allclose(surrogate_coeffs(np.ones(3), EdgeVectorization(3), 0.7), [0.7] * 3)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 25), delta=st.floats(0.1, 5), seed=st.integers(0, 10**6))
def test_surrogate_sum_identity(n, delta, seed):
    ev = EdgeVectorization(n)
    w = np.random.default_rng(seed).uniform(0.01, 2.0, ev.r)
    # brute-force: each node j contributes sum over its edges of w_e / deg_j
    T = ev.incidence()
    deg = T @ w
    brute = delta * sum(w[e] / deg[j] for j in range(n) for e in range(ev.r) if T[j, e])
    c = surrogate_coeffs(w, ev, delta)
    assert c.sum() == pytest.approx(brute, rel=1e-10)
    assert c.sum() == pytest.approx(delta * n, rel=1e-10)
    np.testing.assert_allclose(c, surrogate_coeffs(w, T, delta), rtol=1e-12)


def test_mm_update_values():
    assert mm_update([1.0], [0.0], [2.0], 1.0)[0] == pytest.approx(1.0)
    assert mm_update([1.0], [3.0], [0.0], 1.0)[0] == 0.0
    assert mm_update([1.0], [1.0], [1.0], 1.0)[0] == pytest.approx((-2 + math.sqrt(12)) / 4)
    assert mm_update([1.0], [1.0], [1.0], 1.0)[0] == pytest.approx(0.36603, abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(d=st.floats(0, 10), c=st.floats(1e-3, 10), gamma=st.floats(0.05, 5))
def test_mm_update_minimises_scalar_surrogate(d, c, gamma):
    w = mm_update([1.0], [d], [c], gamma)[0]
    g = lambda x: 2 * d * x - c * math.log(x) + gamma * x * x  # noqa: E731
    assert w > 0
    for x in (w * 0.9, w * 1.1, w + 1e-3):
        assert g(w) <= g(x) + 1e-12


def test_zero_distance_fixed_point():
    for n, delta, gamma in ((5, 1.0, 0.5), (12, 2.0, 0.3)):
        r = n * (n - 1) // 2
        res = learn_edge_vector(np.zeros(r), n, LearnConfig(delta=delta, gamma=gamma))
        expected = math.sqrt(delta / (gamma * (n - 1)))
        np.testing.assert_allclose(res.w, expected, rtol=1e-12)
        assert res.converged


def _instance(rng, n=20, m=9):
    X = rng.random((n, m))
    return pairwise_distances(X)


def test_monotone_descent_and_stopping():
    rng = np.random.default_rng(7)
    for _ in range(10):
        res = learn_weights_traced(cfg=LearnConfig(), D=_instance(rng))
        f = [v for _, v in res.trace]
        assert all(b <= a + 1e-10 for a, b in zip(f, f[1:]))
        assert res.converged and res.iterations <= 500


def test_fixed_point_consistency():
    rng = np.random.default_rng(8)
    cfg = LearnConfig()
    for _ in range(5):
        D = _instance(rng)
        res = learn_weights_traced(cfg=cfg, D=D)
        ev = EdgeVectorization(20)
        d = ev.vectorize(D)
        step = mm_update(res.w, d, surrogate_coeffs(res.w, ev, cfg.delta), cfg.gamma)
        moved = float(np.max(np.abs(step - res.w)))
        assert moved < 10 * cfg.epsilon, f"one more MM step moves w by {moved:.3g}"


def test_learned_graph_contract():
    rng = np.random.default_rng(9)
    g = learn_weights(rng.random((15, 6)))
    assert g.scheme == "learned"
    assert np.array_equal(g.W, g.W.T) and np.all(np.diag(g.W) == 0)
    assert np.all(g.W.sum(axis=1) > 0)


def test_permutation_equivariance():
    rng = np.random.default_rng(10)
    X = rng.random((12, 5))
    perm = rng.permutation(12)
    a = learn_weights(X).W
    b = learn_weights(X[perm]).W
    np.testing.assert_allclose(b, a[np.ix_(perm, perm)], rtol=1e-9, atol=1e-12)


def test_scaling_applied_before_distances():
    rng = np.random.default_rng(11)
    X = rng.random((10, 4))
    Xs = X * [1, 10, 100, 1000] + 5
    np.testing.assert_allclose(learn_weights(X).W, learn_weights(Xs).W, rtol=1e-9, atol=1e-12)
    assert not np.allclose(learn_weights(X, scale=False).W, learn_weights(Xs, scale=False).W)


def test_max_iter_reported():
    res = learn_weights_traced(cfg=LearnConfig(max_iter=2, epsilon=1e-15), D=_instance(np.random.default_rng(3)))
    assert res.iterations == 2 and not res.converged


def test_errors():
    with pytest.raises(ValueError):
        LearnConfig(gamma=0)
    with pytest.raises(DegenerateGraphError):
        learn_edge_vector(np.zeros(0), 1)
    with pytest.raises(ConvergenceError, match="iteration 1"):
        learn_edge_vector(np.array([np.nan]), 2)
    with pytest.raises(ValueError):
        learn_weights()
