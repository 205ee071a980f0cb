"""``lesiongraph`` command line.

Stage subcommands read and write per-image directories so each step can be
rerun or inspected on its own; ``run`` chains all of them.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import artifacts
from .conventional import conventional_features
from .errors import LesionGraphError
from .features import fuse_levels, graph_feature_vector
from .graph import gaussian_weights, pairwise_distances, prune
from .graphlearn import LearnConfig, learn_weights_traced
from .ingest import FoldAssignment, load_corpus, stratified_folds
from .ml import cross_validate, export_fold_matrices
from .pipeline import PipelineConfig, run_pipeline
from .report import contribution_table, write_contribution_report
from .signals import KINDS, build_signal_matrix, minmax_columns
from .superpixel import DEFAULT_COMPACTNESS, SEG_LEVELS, SHG_LEVELS, build_maps

logger = logging.getLogger("lesiongraph")


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _str_list(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _image_dirs(root: Path) -> list[Path]:
    return sorted(p for p in root.iterdir() if p.is_dir())


# ------------------------------------------------------------ stage commands


def cmd_ingest(args) -> int:
    corpus = load_corpus(args.root, args.labels, jobs=args.jobs)
    folds = stratified_folds([(im.id, im.label) for im in corpus], args.folds, args.seed)
    folds.save(args.out)
    print(f"{len(corpus)} images -> {args.folds} folds written to {args.out}")
    return 0


def cmd_segment(args) -> int:
    levels = args.levels or list(SEG_LEVELS if args.mode == "seg" else SHG_LEVELS)
    for im in load_corpus(args.root, args.labels, jobs=args.jobs):
        maps = build_maps(im, args.mode, levels, args.compactness, args.exact_n)
        artifacts.save_multilevel(maps, Path(args.out) / im.id)
        logger.info("%s: levels %s", im.id, maps.levels)
    return 0


def cmd_signals(args) -> int:
    corpus = {im.id: im for im in load_corpus(args.root, args.labels, jobs=args.jobs)}
    for image_dir in _image_dirs(Path(args.maps)):
        im = corpus[image_dir.name]
        for png in sorted(image_dir.glob("level*_n*.png")):
            smap, _ = artifacts.load_map(png)
            sm = build_signal_matrix(im, smap, args.kind)
            artifacts.save_signal_csv(sm, Path(args.out) / im.id / f"{png.stem}_{args.kind}.csv")
    return 0


def _signal_files(signals_dir: Path):
    for image_dir in _image_dirs(signals_dir):
        for path in sorted(image_dir.glob("level*_n*_*.csv")):
            yield image_dir.name, path


def _level_stem(signal_path: Path) -> str:
    return signal_path.stem.rsplit("_", 1)[0]


def cmd_graph(args) -> int:
    for image_id, path in _signal_files(Path(args.signals)):
        sm = artifacts.load_signal_csv(path)
        X = minmax_columns(sm.X) if args.scale else sm.X
        g = gaussian_weights(pairwise_distances(X))
        artifacts.save_weights_csv(g, Path(args.out) / image_id / f"{_level_stem(path)}.csv")
    return 0


def cmd_learn(args) -> int:
    cfg = LearnConfig(args.delta, args.gamma, args.eps, args.max_iter)
    for image_id, path in _signal_files(Path(args.signals)):
        sm = artifacts.load_signal_csv(path)
        result = learn_weights_traced(sm.X, cfg, scale=args.scale)
        stem = _level_stem(path)
        artifacts.save_weights_csv(result.graph, Path(args.out) / image_id / f"{stem}.csv")
        if args.trace:
            artifacts.save_trace_csv(result.trace, Path(args.out) / image_id / f"{stem}_trace.csv")
        logger.info("%s/%s: %d iterations, converged=%s", image_id, stem, result.iterations, result.converged)
    return 0


def _graph_files(graphs_dir: Path):
    for image_dir in _image_dirs(graphs_dir):
        for path in sorted(image_dir.glob("level*_n*.csv")):
            if not path.stem.endswith("_trace"):
                yield image_dir.name, path


def cmd_prune(args) -> int:
    for image_id, path in _graph_files(Path(args.graphs)):
        g = prune(artifacts.load_weights_csv(path), args.tau)
        artifacts.save_weights_csv(g, Path(args.out) / image_id / path.name)
    return 0


def cmd_features(args) -> int:
    signals_dir = Path(args.signals)
    for image_id, path in _graph_files(Path(args.graphs)):
        g = artifacts.load_weights_csv(path)
        matches = sorted((signals_dir / image_id).glob(f"{path.stem}_*.csv"))
        if not matches:
            raise LesionGraphError(f"no signal matrix for {image_id}/{path.stem}")
        v = graph_feature_vector(g, artifacts.load_signal_csv(matches[0]))
        artifacts.save_graph_features(v, Path(args.out) / image_id / f"{path.stem}.json")
    return 0


def cmd_fuse(args) -> int:
    corpus = load_corpus(args.root, args.labels, jobs=args.jobs)
    vectors = []
    for im in corpus:
        files = sorted((Path(args.features) / im.id).glob("level*_n*.json"),
                       key=lambda p: int(p.stem.split("_")[0][5:]))
        per_level = [artifacts.load_graph_features(p) for p in files]
        conv = conventional_features(im) if args.conventional else None
        vectors.append(fuse_levels(per_level, conv, expected_levels=args.levels))
    artifacts.save_feature_matrix([im.id for im in corpus], [im.label for im in corpus], vectors, args.out)
    print(f"wrote {len(vectors)} x {len(vectors[0].values) if vectors else 0} feature matrix to {args.out}")
    return 0


def cmd_cv(args) -> int:
    ids, labels, X, tags = artifacts.load_feature_matrix(args.features)
    folds = FoldAssignment.load(args.folds)
    y = np.array([int(label == "melanoma") for label in labels])
    report = cross_validate(X, y, ids, folds, args.classifiers, args.k_select, column_tags=tags, seed=args.seed)
    artifacts.write_json(args.report, report.to_json())
    if args.export_dir:
        export_fold_matrices(X, y, ids, report, args.export_dir)
    _print_summary(report.classifiers)
    return 0


def cmd_report(args) -> int:
    report = artifacts.read_json(args.report)
    selection = report.get("selection_by_source")
    if selection is None:
        raise LesionGraphError(f"{args.report} has no selection_by_source block")
    csv_path, svg_path = write_contribution_report(selection, args.out)
    for tag, count, pct in contribution_table(selection):
        print(f"{tag:>14s} {count:6d} {pct:7.2f}%")
    print(f"wrote {csv_path} and {svg_path}")
    return 0


def cmd_run(args) -> int:
    payload = artifacts.read_json(args.config) if args.config else {}
    base = PipelineConfig.from_json(payload)
    learn = {k: v for k, v in (("delta", args.delta), ("gamma", args.gamma), ("epsilon", args.eps),
                                ("max_iter", args.max_iter)) if v is not None}
    levels = args.levels
    if levels is None and args.mode and "levels" not in payload:
        levels = SEG_LEVELS if args.mode == "seg" else SHG_LEVELS
    cfg = base.with_overrides(
        mode=args.mode, levels=tuple(levels) if levels else None, weight_scheme=args.weights,
        signal_kind=args.kind, prune_tau=args.tau, selection_k=args.k_select,
        classifiers=tuple(args.classifiers) if args.classifiers else None, seed=args.seed, folds=args.folds,
        compactness=args.compactness, exact_n=args.exact_n, include_conventional=args.conventional,
        learn=learn or None,
    )
    corpus = load_corpus(args.root, args.labels, jobs=args.jobs)
    folds = FoldAssignment.load(args.folds_file) if args.folds_file else None
    report, out = run_pipeline(cfg, corpus, args.out, jobs=args.jobs, folds=folds,
                               save_intermediate=not args.no_artifacts)
    _print_summary(report.classifiers)
    print(f"artifacts: {out}")
    return 0


def _fmt(v) -> str:
    return "  n/a " if v is None else f"{100 * v:6.2f}"


def _print_summary(classifiers: dict) -> None:
    print(f"{'classifier':<10s} {'AC':>6s} {'Spec':>6s} {'Sens':>6s} {'AUC':>6s}")
    for name, block in classifiers.items():
        agg = block["aggregate"]
        print(f"{name:<10s} {_fmt(agg['ac'])} {_fmt(agg['spec'])} {_fmt(agg['sens'])} {_fmt(agg['auc'])}")


# ------------------------------------------------------------ parser


def _add_corpus(p, required=True):
    p.add_argument("--root", required=required, help="corpus root with images/ and labels.csv")
    p.add_argument("--labels", default=None, help="label CSV (default: <root>/labels.csv)")


def _add_scale(p):
    p.add_argument("--no-scale", dest="scale", action="store_false",
                   help="use raw descriptors instead of per-column [0,1] scaling")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lesiongraph", description="Multi-level superpixel graph features for melanoma detection.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("--jobs", type=int, default=1, help="worker processes for per-image stages")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a corpus and write stratified folds")
    _add_corpus(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="folds.json")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("segment", help="superpixel maps per image")
    _add_corpus(p)
    p.add_argument("--mode", choices=("seg", "shg"), default="seg")
    p.add_argument("--levels", type=_int_list, default=None)
    p.add_argument("--compactness", type=float, default=DEFAULT_COMPACTNESS)
    p.add_argument("--exact-n", dest="exact_n", action="store_true", default=True)
    p.add_argument("--no-exact-n", dest="exact_n", action="store_false")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("signals", help="nodal signal matrices from saved maps")
    _add_corpus(p)
    p.add_argument("--maps", required=True)
    p.add_argument("--kind", choices=KINDS, default="color")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_signals)

    p = sub.add_parser("graph", help="Gaussian-kernel graphs from signal matrices")
    p.add_argument("--signals", required=True)
    p.add_argument("--out", required=True)
    _add_scale(p)
    p.set_defaults(func=cmd_graph)

    p = sub.add_parser("learn", help="MM-learned graphs from signal matrices")
    p.add_argument("--signals", required=True)
    p.add_argument("--delta", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=0.5)
    p.add_argument("--eps", type=float, default=1e-6)
    p.add_argument("--max-iter", type=int, default=500)
    p.add_argument("--trace", action="store_true", help="write the per-iteration objective as CSV")
    p.add_argument("--out", required=True)
    _add_scale(p)
    p.set_defaults(func=cmd_learn)

    p = sub.add_parser("prune", help="drop the weakest fraction of edges")
    p.add_argument("--graphs", required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_prune)

    p = sub.add_parser("features", help="per-level graph feature vectors")
    p.add_argument("--graphs", required=True)
    p.add_argument("--signals", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("fuse", help="concatenate levels (+ conventional) into a feature matrix")
    _add_corpus(p)
    p.add_argument("--features", required=True)
    p.add_argument("--levels", type=_int_list, default=None, help="expected level sizes, in order")
    p.add_argument("--no-conventional", dest="conventional", action="store_false")
    p.add_argument("--out", default="features.csv")
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("cv", help="cross-validated selection + classification")
    p.add_argument("--features", required=True)
    p.add_argument("--folds", required=True)
    p.add_argument("--classifiers", type=_str_list, default=["knn", "logreg", "rf"])
    p.add_argument("--k-select", type=int, default=150)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--report", default="report.json")
    p.add_argument("--export-dir", default=None, help="write per-fold train/test CSVs for external classifiers")
    p.set_defaults(func=cmd_cv)

    p = sub.add_parser("run", help="full pipeline from a config file and/or flags")
    _add_corpus(p)
    p.add_argument("--config", default=None, help="PipelineConfig JSON; flags override its fields")
    p.add_argument("--out", required=True)
    p.add_argument("--mode", choices=("seg", "shg"), default=None)
    p.add_argument("--levels", type=_int_list, default=None)
    p.add_argument("--weights", choices=("gaussian", "learned"), default=None)
    p.add_argument("--kind", choices=KINDS, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--k-select", type=int, default=None)
    p.add_argument("--classifiers", type=_str_list, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--folds", type=int, default=None)
    p.add_argument("--folds-file", default=None, help="reuse a folds.json instead of generating one")
    p.add_argument("--compactness", type=float, default=None)
    p.add_argument("--no-exact-n", dest="exact_n", action="store_const", const=False, default=None)
    p.add_argument("--no-conventional", dest="conventional", action="store_const", const=False, default=None)
    p.add_argument("--no-artifacts", action="store_true", help="skip per-image intermediate files")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("report", help="feature-contribution table and SVG from report.json")
    p.add_argument("--report", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except LesionGraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
