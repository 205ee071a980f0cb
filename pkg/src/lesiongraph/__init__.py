"""Multi-level superpixel graph features for dermoscopic melanoma detection."""

from ._kernels import BACKEND
from .errors import (ConfigError, ConvergenceError, CorpusError, DegenerateGraphError, FoldError,
                     LesionGraphError, NotFittedError, SegmentationError, StageError)
from .features import (FusedFeatureVector, GraphFeatureVector, fuse_levels, gft, global_metrics,
                       graph_feature_vector, igft, local_metrics, spectral_features)
from .graph import WeightedGraph, gaussian_weights, pairwise_distances, prune
from .graphlearn import LearnConfig, learn_weights
from .ingest import FoldAssignment, LabelledImage, load_corpus, stratified_folds
from .ml import EvalReport, cross_validate, evaluate, fit_normalizer, l1_select
from .pipeline import PipelineConfig, run_pipeline
from .signals import NodalSignalMatrix, build_signal_matrix
from .superpixel import MultiLevelMaps, SuperpixelMap, build_maps

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "ConvergenceError", "CorpusError", "DegenerateGraphError", "EvalReport",
    "FoldAssignment", "FoldError", "FusedFeatureVector", "GraphFeatureVector", "LabelledImage", "LearnConfig",
    "LesionGraphError", "MultiLevelMaps", "NodalSignalMatrix", "NotFittedError", "PipelineConfig",
    "SegmentationError", "StageError", "SuperpixelMap", "WeightedGraph", "build_maps", "build_signal_matrix",
    "cross_validate", "evaluate", "fit_normalizer", "fuse_levels", "gaussian_weights", "gft", "global_metrics",
    "graph_feature_vector", "igft", "l1_select", "learn_weights", "load_corpus", "local_metrics",
    "pairwise_distances", "prune", "run_pipeline", "spectral_features", "stratified_folds",
]
