import numpy as np
import pytest

from lesiongraph import _kernels
from lesiongraph.graph import WeightedGraph
from lesiongraph.synthetic import make_corpus

BACKENDS = ["python"] + (["cython"] if _kernels.compiled_backend is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Route path kernels through one backend for the duration of a test."""
    mod = _kernels.python_backend if request.param == "python" else _kernels.compiled_backend
    for name in ("all_pairs_shortest", "betweenness", "local_efficiency"):
        monkeypatch.setattr(_kernels, name, getattr(mod, name))
    return request.param


def random_graph(rng, n, density=0.6, low=0.05, high=1.0) -> WeightedGraph:
    W = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    w = rng.uniform(low, high, iu[0].size)
    w[rng.random(iu[0].size) > density] = 0.0
    W[iu] = w
    return WeightedGraph(W + W.T, "random")


@pytest.fixture(scope="session")
def synthetic_root(tmp_path_factory):
    return make_corpus(tmp_path_factory.mktemp("corpus"), per_class=20, size=64, seed=0)


@pytest.fixture(scope="session")
def small_root(tmp_path_factory):
    return make_corpus(tmp_path_factory.mktemp("small"), per_class=4, size=40, seed=1)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
