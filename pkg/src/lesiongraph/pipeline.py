"""End-to-end orchestration: ingest -> segment -> signals -> graph -> prune -> features -> fuse -> cv."""

from __future__ import annotations

import hashlib
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from . import artifacts
from .conventional import conventional_features
from .errors import ConfigError, StageError
from .features import FusedFeatureVector, fuse_levels, graph_feature_vector
from .graph import WeightedGraph, gaussian_weights, pairwise_distances, prune
from .graphlearn import LearnConfig, learn_weights_traced
from .ingest import FoldAssignment, LabelledImage, stratified_folds
from .ml import CLASSIFIERS, EvalReport, cross_validate
from .report import write_contribution_report
from .signals import KINDS, build_signal_matrix, minmax_columns
from .superpixel import DEFAULT_COMPACTNESS, SEG_LEVELS, SHG_LEVELS, build_maps

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "seg"
    levels: tuple[int, ...] | None = None
    weight_scheme: str = "learned"
    signal_kind: str = "color"
    prune_tau: float = 0.0
    learn: LearnConfig = field(default_factory=LearnConfig)
    selection_k: int = 150
    classifiers: tuple[str, ...] = CLASSIFIERS
    seed: int = 42
    folds: int = 10
    compactness: float = DEFAULT_COMPACTNESS
    exact_n: bool = True
    include_conventional: bool = True
    scale_signals: bool = True

    def __post_init__(self):
        if self.mode not in ("seg", "shg"):
            raise ConfigError(f"mode must be 'seg' or 'shg', got {self.mode!r}")
        if self.levels is None:
            object.__setattr__(self, "levels", SEG_LEVELS if self.mode == "seg" else SHG_LEVELS)
        object.__setattr__(self, "levels", tuple(int(x) for x in self.levels))
        object.__setattr__(self, "classifiers", tuple(self.classifiers))
        if isinstance(self.learn, dict):
            object.__setattr__(self, "learn", LearnConfig(**self.learn))
        if self.weight_scheme not in ("gaussian", "learned"):
            raise ConfigError(f"weight_scheme must be 'gaussian' or 'learned', got {self.weight_scheme!r}")
        if self.signal_kind not in KINDS:
            raise ConfigError(f"signal_kind must be one of {KINDS}, got {self.signal_kind!r}")
        if not 0.0 <= self.prune_tau <= 1.0:
            raise ConfigError(f"prune_tau must lie in [0, 1], got {self.prune_tau}")
        if self.selection_k < 1 or self.folds < 2:
            raise ConfigError("selection_k must be >= 1 and folds >= 2")
        unknown = set(self.classifiers) - set(CLASSIFIERS)
        if unknown:
            raise ConfigError(f"unknown classifiers {sorted(unknown)}")

    def to_json(self) -> dict:
        d = asdict(self)
        d["levels"] = list(self.levels)
        d["classifiers"] = list(self.classifiers)
        return d

    @classmethod
    def from_json(cls, payload: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        extra = set(payload) - known
        if extra:
            raise ConfigError(f"unknown config fields {sorted(extra)}")
        return cls(**payload)

    def with_overrides(self, **overrides) -> "PipelineConfig":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        learn = overrides.pop("learn", None)
        cfg = replace(self, **overrides)
        if learn:
            cfg = replace(cfg, learn=replace(cfg.learn, **learn))
        return cfg

    def digest(self) -> str:
        """64-bit hex digest of the canonical JSON form."""
        canon = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.blake2b(canon.encode("utf-8"), digest_size=8).hexdigest()


@dataclass
class ImageResult:
    image_id: str
    fused: FusedFeatureVector
    maps: object = None
    signals: list = field(default_factory=list)
    graphs: list = field(default_factory=list)
    traces: list = field(default_factory=list)


def build_graph(signal_X: np.ndarray, cfg: PipelineConfig) -> tuple[WeightedGraph, list]:
    """Weighted graph for one level, pruned when ``cfg.prune_tau > 0``."""
    X = minmax_columns(signal_X) if cfg.scale_signals else np.asarray(signal_X)
    trace = []
    if cfg.weight_scheme == "gaussian":
        g = gaussian_weights(pairwise_distances(X))
    else:
        result = learn_weights_traced(cfg=cfg.learn, D=pairwise_distances(X))
        g, trace = result.graph, result.trace
    return prune(g, cfg.prune_tau), trace


def process_image(image: LabelledImage, cfg: PipelineConfig, keep_artifacts: bool = False) -> ImageResult:
    stage = "segment"
    try:
        maps = build_maps(image, cfg.mode, cfg.levels, cfg.compactness, cfg.exact_n)
        per_level, signals, graphs, traces = [], [], [], []
        for smap in maps.maps:
            stage = "signals"
            sm = build_signal_matrix(image, smap, cfg.signal_kind)
            stage = "graph"
            g, trace = build_graph(sm.X, cfg)
            stage = "features"
            per_level.append(graph_feature_vector(g, sm))
            if keep_artifacts:
                signals.append(sm)
                graphs.append(g)
                traces.append(trace)
        stage = "fuse"
        conv = conventional_features(image) if cfg.include_conventional else None
        fused = fuse_levels(per_level, conv, expected_levels=[m.n for m in maps.maps])
    except StageError:
        raise
    except Exception as exc:  # noqa: BLE001
        raise StageError(stage, image.id, exc) from exc
    return ImageResult(image.id, fused, maps if keep_artifacts else None, signals, graphs, traces)


def _process_star(args):
    return process_image(*args)


def extract_features(corpus: Sequence[LabelledImage], cfg: PipelineConfig, jobs: int = 1,
                     keep_artifacts: bool = False) -> list[ImageResult]:
    work = [(img, cfg, keep_artifacts) for img in corpus]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_process_star, work))
    return [_process_star(w) for w in work]


def save_image_artifacts(res: ImageResult, cfg: PipelineConfig, out: Path) -> None:
    artifacts.save_multilevel(res.maps, out / "maps" / res.image_id)
    for smap, sm, g, trace in zip(res.maps.maps, res.signals, res.graphs, res.traces):
        stem = artifacts.map_stem(smap.level_index, smap.n)
        artifacts.save_signal_csv(sm, out / "signals" / res.image_id / f"{stem}_{sm.kind}.csv")
        artifacts.save_weights_csv(g, out / "graphs" / res.image_id / f"{stem}.csv")
        if trace:
            artifacts.save_trace_csv(trace, out / "traces" / res.image_id / f"{stem}.csv")


def run_pipeline(cfg: PipelineConfig, corpus: Sequence[LabelledImage], out_dir, jobs: int = 1,
                 folds: FoldAssignment | None = None, save_intermediate: bool = True) -> tuple[EvalReport, Path]:
    """Run every stage and write artifacts under ``out_dir/<config digest>/``."""
    out = Path(out_dir) / cfg.digest()
    out.mkdir(parents=True, exist_ok=True)
    artifacts.write_json(out / "config.json", cfg.to_json())

    if folds is None:
        folds = stratified_folds([(im.id, im.label) for im in corpus], cfg.folds, cfg.seed)
    folds.save(out / "folds.json")

    logger.info("extracting features for %d images (config %s)", len(corpus), cfg.digest())
    results = extract_features(corpus, cfg, jobs=jobs, keep_artifacts=save_intermediate)
    if save_intermediate:
        for res in results:
            save_image_artifacts(res, cfg, out)

    ids = [im.id for im in corpus]
    labels = [im.label for im in corpus]
    vectors = [r.fused for r in results]
    artifacts.save_feature_matrix(ids, labels, vectors, out / "features.csv",
                                  {"levels": list(cfg.levels), "kind": cfg.signal_kind})

    X = np.vstack([v.values for v in vectors])
    y = np.array([im.y for im in corpus])
    stage = "cv"
    try:
        report = cross_validate(X, y, ids, folds, cfg.classifiers, cfg.selection_k,
                                column_tags=vectors[0].column_tags(), seed=cfg.seed)
    except Exception as exc:  # noqa: BLE001
        raise StageError(stage, "*", exc) from exc
    report.config.update({"pipeline": cfg.to_json(), "config_digest": cfg.digest()})
    artifacts.write_json(out / "report.json", report.to_json())
    write_contribution_report(report.selection_by_source, out)
    return report, out
