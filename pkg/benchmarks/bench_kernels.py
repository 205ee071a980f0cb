"""Time the path-metric kernels on both backends.

    python3 benchmarks/bench_kernels.py --sizes 20 60 100 --repeat 3

Also times the full per-graph feature vector with whichever backend is active.
"""
import argparse
import time

import numpy as np

from lesiongraph import _kernels
from lesiongraph.features import edge_lengths, graph_feature_vector
from lesiongraph.graphlearn import learn_weights


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench(sizes, repeat, seed):
    backends = [("python", _kernels.python_backend)]
    if _kernels.compiled_backend is not None:
        backends.append(("cython", _kernels.compiled_backend))
    rng = np.random.default_rng(seed)
    print(f"{'n':>5} {'backend':>8} {'shortest':>10} {'between':>10} {'loc_eff':>10} {'total':>10}")
    for n in sizes:
        X = rng.random((n, 9))
        g = learn_weights(X)
        L = edge_lengths(g.W)
        totals = {}
        for name, mod in backends:
            t_sp = _best(lambda: mod.all_pairs_shortest(L), repeat)
            t_bc = _best(lambda: mod.betweenness(L), repeat)
            t_le = _best(lambda: mod.local_efficiency(L), repeat)
            totals[name] = t_sp + t_bc + t_le
            print(f"{n:>5} {name:>8} {t_sp:>10.4f} {t_bc:>10.4f} {t_le:>10.4f} {totals[name]:>10.4f}")
        if "cython" in totals:
            print(f"{'':>5} {'speedup':>8} {totals['python'] / totals['cython']:>43.1f}x")
        t_vec = _best(lambda: graph_feature_vector(g, X), repeat)
        print(f"{'':>5} {'vector':>8} {t_vec:>43.4f}  ({_kernels.BACKEND})")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[20, 40, 60, 80, 100])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    bench(args.sizes, args.repeat, args.seed)


if __name__ == "__main__":
    main()
