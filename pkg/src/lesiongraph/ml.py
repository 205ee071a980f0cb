"""Normalisation, L1-logistic feature selection, classifiers and cross-validation."""

from __future__ import annotations

import hashlib
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit
from scipy.stats import rankdata
from sklearn.ensemble import RandomForestClassifier
from sklearn.linear_model import LogisticRegression

from .errors import NotFittedError
from .ingest import FoldAssignment

logger = logging.getLogger(__name__)

CLASSIFIERS = ("knn", "logreg", "rf")
LAMBDA_BOUNDS = (1e-6, 1e2)
BISECTION_STEPS = 60


# ------------------------------------------------------------ normalisation


@dataclass(frozen=True)
class NormalizationModel:
    lo: np.ndarray
    hi: np.ndarray

    def transform(self, X) -> np.ndarray:
        """Map to [0, 1] with the training range; values outside it are clamped, constant columns give 0."""
        X = np.asarray(X, dtype=np.float64)
        span = self.hi - self.lo
        safe = np.where(span > 0, span, 1.0)
        return np.where(span > 0, np.clip((X - self.lo) / safe, 0.0, 1.0), 0.0)

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.lo).tobytes())
        h.update(np.ascontiguousarray(self.hi).tobytes())
        return h.hexdigest()


def fit_normalizer(train_rows) -> NormalizationModel:
    X = np.asarray(train_rows, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError("need at least two training rows to fit a normaliser")
    return NormalizationModel(X.min(axis=0), X.max(axis=0))


# ------------------------------------------------------------ L1 selection


def soft_threshold(v: np.ndarray, t: float) -> np.ndarray:
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def l1_logistic(X, y, lam: float, *, max_iter: int = 1000, tol: float = 1e-7,
                coef0: np.ndarray | None = None, intercept0: float = 0.0) -> tuple[np.ndarray, float]:
    """L1-penalised logistic regression by accelerated proximal gradient (FISTA).

    Minimises ``mean log-loss + lam * ||coef||_1``; the intercept is not
    penalised. Uses a fixed step 1/L with the Lipschitz bound of the smooth part.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, p = X.shape
    smax = np.linalg.norm(np.hstack([X, np.ones((n, 1))]), 2)
    step = 1.0 / max(0.25 * smax * smax / n, 1e-12)

    beta = np.zeros(p) if coef0 is None else coef0.copy()
    b = float(intercept0)
    z_beta, z_b = beta.copy(), b
    t = 1.0
    for _ in range(max_iter):
        resid = expit(X @ z_beta + z_b) - y
        grad = X.T @ resid / n
        beta_new = soft_threshold(z_beta - step * grad, step * lam)
        b_new = z_b - step * resid.mean()
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        mom = (t - 1.0) / t_new
        change = max(np.max(np.abs(beta_new - beta), initial=0.0), abs(b_new - b))
        z_beta = beta_new + mom * (beta_new - beta)
        z_b = b_new + mom * (b_new - b)
        beta, b, t = beta_new, b_new, t_new
        if change <= tol * max(1.0, np.max(np.abs(beta), initial=0.0)):
            break
    return beta, b


@dataclass(frozen=True)
class SelectionModel:
    selected: tuple[int, ...]
    k: int
    weights: np.ndarray = field(repr=False)
    lam: float = float("nan")

    def transform(self, X) -> np.ndarray:
        return np.asarray(X)[:, list(self.selected)]

    def checksum(self) -> str:
        h = hashlib.sha256()
        h.update(np.asarray(self.selected, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(self.weights).tobytes())
        return h.hexdigest()


def _top_k(coef: np.ndarray, k: int) -> tuple[int, ...]:
    nz = np.flatnonzero(coef)
    order = nz[np.argsort(-np.abs(coef[nz]), kind="stable")]
    return tuple(int(i) for i in order[:k])


def l1_select(train_X, train_y, k: int = 150, *, bounds=LAMBDA_BOUNDS, steps: int = BISECTION_STEPS,
              max_iter: int = 1000) -> SelectionModel:
    """Pick the ``k`` features with the largest L1-logistic coefficients.

    The penalty is bisected (in log space) for the largest value whose fit
    still has at least ``k`` non-zero coefficients. When even the smallest
    penalty leaves fewer than ``k`` non-zeros, all of them are kept.
    """
    X = np.asarray(train_X, dtype=np.float64)
    y = np.asarray(train_y, dtype=np.float64)
    p = X.shape[1]
    lo, hi = bounds
    coef_lo, b_lo = l1_logistic(X, y, lo, max_iter=max_iter)
    if k >= p:
        return SelectionModel(tuple(range(p)), k, coef_lo, lo)
    nnz_lo = int(np.count_nonzero(coef_lo))
    if nnz_lo < k:
        warnings.warn(f"only {nnz_lo} non-zero coefficients at lambda={lo:g}; keeping all of them (k={k})",
                      RuntimeWarning, stacklevel=2)
        return SelectionModel(_top_k(coef_lo, k), k, coef_lo, lo)
    log_lo, log_hi = math.log(lo), math.log(hi)
    for _ in range(steps):
        mid = math.exp(0.5 * (log_lo + log_hi))
        coef_mid, b_mid = l1_logistic(X, y, mid, max_iter=max_iter, coef0=coef_lo, intercept0=b_lo)
        if np.count_nonzero(coef_mid) >= k:
            log_lo, coef_lo, b_lo = math.log(mid), coef_mid, b_mid
        else:
            log_hi = math.log(mid)
    return SelectionModel(_top_k(coef_lo, k), k, coef_lo, math.exp(log_lo))


# ------------------------------------------------------------ classifiers


class Classifier:
    """Binary classifier returning a positive-class score in [0, 1]."""

    name = "base"

    def __init__(self):
        self._fitted = False

    def fit(self, X, y) -> "Classifier":
        self._fit(np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64))
        self._fitted = True
        return self

    def score(self, X) -> np.ndarray:
        if not self._fitted:
            raise NotFittedError(f"{self.name}: predict called before fit")
        return self._score(np.asarray(X, dtype=np.float64))

    def predict(self, X, threshold: float = 0.5) -> np.ndarray:
        return (self.score(X) >= threshold).astype(np.int64)

    def _fit(self, X, y):
        raise NotImplementedError

    def _score(self, X):
        raise NotImplementedError


class KNNClassifier(Classifier):
    name = "knn"

    def __init__(self, n_neighbors: int = 5):
        super().__init__()
        self.n_neighbors = n_neighbors

    def _fit(self, X, y):
        self.X_, self.y_ = X, y

    def _score(self, X):
        k = min(self.n_neighbors, len(self.X_))
        d2 = ((X[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        nearest = np.argsort(d2, axis=1, kind="stable")[:, :k]
        return self.y_[nearest].mean(axis=1)


class LogRegClassifier(Classifier):
    name = "logreg"

    def __init__(self, C: float = 1.0):
        super().__init__()
        self.C = C

    def _fit(self, X, y):
        if np.unique(y).size < 2:
            self.constant_ = float(y[0])
            return
        self.constant_ = None
        self.model_ = LogisticRegression(C=self.C, max_iter=5000).fit(X, y)

    def _score(self, X):
        if self.constant_ is not None:
            return np.full(len(X), self.constant_)
        return expit(self.model_.decision_function(X))


class RandomForest(Classifier):
    name = "rf"

    def __init__(self, n_trees: int = 200, max_depth: int | None = None, seed: int = 0):
        super().__init__()
        self.n_trees, self.max_depth, self.seed = n_trees, max_depth, seed

    def _fit(self, X, y):
        self.model_ = RandomForestClassifier(n_estimators=self.n_trees, max_depth=self.max_depth,
                                             random_state=self.seed, n_jobs=1).fit(X, y)

    def _score(self, X):
        proba = self.model_.predict_proba(X)
        classes = list(self.model_.classes_)
        return proba[:, classes.index(1)] if 1 in classes else np.zeros(len(X))


def make_classifier(name: str, seed: int = 0) -> Classifier:
    if name == "knn":
        return KNNClassifier()
    if name == "logreg":
        return LogRegClassifier()
    if name == "rf":
        return RandomForest(seed=seed)
    raise ValueError(f"unknown classifier {name!r}; native choices are {CLASSIFIERS}")


# ------------------------------------------------------------ metrics


def auc_score(scores, labels) -> float | None:
    """Mann-Whitney AUC with half credit for ties; ``None`` if a class is missing."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(bool)
    n_pos = int(y.sum())
    n_neg = y.size - n_pos
    if n_pos == 0 or n_neg == 0:
        return None
    ranks = rankdata(s)
    return float((ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def _ratio(num: int, den: int) -> float | None:
    return num / den if den else None


def evaluate(scores, labels, threshold: float = 0.5) -> dict:
    """Confusion counts plus AC, Spec, Sens at ``threshold`` and the rank AUC."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels).astype(np.int64)
    if s.shape != y.shape:
        raise ValueError("scores and labels must have equal length")
    pred = (s >= threshold).astype(np.int64)
    tp = int(np.sum((pred == 1) & (y == 1)))
    tn = int(np.sum((pred == 0) & (y == 0)))
    fp = int(np.sum((pred == 1) & (y == 0)))
    fn = int(np.sum((pred == 0) & (y == 1)))
    auc = auc_score(s, y)
    return {
        "n": int(y.size), "tp": tp, "tn": tn, "fp": fp, "fn": fn,
        "ac": _ratio(tp + tn, tp + tn + fp + fn),
        "spec": _ratio(tn, tn + fp),
        "sens": _ratio(tp, tp + fn),
        "auc": auc,
        "auc_defined": auc is not None,
    }


def _weighted_mean(entries: Sequence[dict], key: str) -> float | None:
    pairs = [(e[key], e["n"]) for e in entries if e[key] is not None]
    if not pairs:
        return None
    total = sum(w for _, w in pairs)
    return float(sum(v * w for v, w in pairs) / total)


def aggregate(entries: Sequence[dict]) -> dict:
    """Fold-size weighted means; folds with undefined AUC are left out of the AUC mean."""
    out = {key: _weighted_mean(entries, key) for key in ("ac", "spec", "sens", "auc")}
    for key in ("tp", "tn", "fp", "fn"):
        out[key] = int(sum(e[key] for e in entries))
    out["auc_excluded_folds"] = [i for i, e in enumerate(entries) if not e["auc_defined"]]
    return out


# ------------------------------------------------------------ cross-validation


@dataclass
class FoldState:
    fold: int
    train_ids: list[str]
    test_ids: list[str]
    normalizer: NormalizationModel
    selection: SelectionModel


@dataclass
class EvalReport:
    classifiers: dict[str, dict]
    selection_by_source: dict[str, int]
    folds: list[dict]
    config: dict = field(default_factory=dict)
    fold_states: list[FoldState] = field(default_factory=list, repr=False)
    predictions: dict[str, dict[str, float]] = field(default_factory=dict, repr=False)

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "classifiers": self.classifiers,
            "selection_by_source": self.selection_by_source,
            "folds": self.folds,
            "predictions": self.predictions,
        }


def cross_validate(X, labels, ids: Sequence[str], folds: FoldAssignment,
                   classifiers: Sequence[str] = CLASSIFIERS, k_select: int = 150,
                   column_tags: Sequence[str] | None = None, seed: int = 42, threshold: float = 0.5) -> EvalReport:
    """Stratified CV with normaliser and selector fitted on training rows only."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    ids = list(ids)
    if len(ids) != X.shape[0] or len(y) != X.shape[0]:
        raise ValueError("X, labels and ids must have the same number of rows")
    missing = set(ids) - set(folds.fold_of)
    if missing:
        raise ValueError(f"fold assignment does not cover ids: {sorted(missing)[:5]}")
    tags = list(column_tags) if column_tags is not None else ["features"] * X.shape[1]
    fold_index = np.array([folds.fold_of[i] for i in ids])

    per_fold: dict[str, list[dict]] = {name: [] for name in classifiers}
    predictions: dict[str, dict[str, float]] = {name: {} for name in classifiers}
    selection_counts: dict[str, int] = {}
    fold_records, states = [], []
    for f in range(folds.k):
        test = np.flatnonzero(fold_index == f)
        train = np.flatnonzero(fold_index != f)
        if test.size == 0:
            continue
        norm = fit_normalizer(X[train])
        Xtr = norm.transform(X[train])
        Xte = norm.transform(X[test])
        sel = l1_select(Xtr, y[train], k_select)
        for col in sel.selected:
            selection_counts[tags[col]] = selection_counts.get(tags[col], 0) + 1
        states.append(FoldState(f, [ids[i] for i in train], [ids[i] for i in test], norm, sel))
        fold_records.append({
            "fold": f, "n_train": int(train.size), "n_test": int(test.size),
            "selected": list(sel.selected), "lambda": sel.lam,
            "normalizer_sha256": norm.checksum(), "selection_sha256": sel.checksum(),
        })
        for name in classifiers:
            clf = make_classifier(name, seed=seed + f).fit(sel.transform(Xtr), y[train])
            scores = clf.score(sel.transform(Xte))
            entry = evaluate(scores, y[test], threshold)
            entry["fold"] = f
            per_fold[name].append(entry)
            for i, s in zip(test, scores):
                predictions[name][ids[i]] = float(s)

    report_classifiers = {
        name: {"per_fold": per_fold[name], "aggregate": aggregate(per_fold[name])} for name in classifiers
    }
    selection = {tag: selection_counts[tag] for tag in sorted(selection_counts, key=_tag_order)}
    return EvalReport(report_classifiers, selection, fold_records,
                      config={"k": folds.k, "seed": seed, "k_select": k_select, "threshold": threshold,
                              "classifiers": list(classifiers)},
                      fold_states=states,
                      predictions={name: dict(sorted(p.items())) for name, p in predictions.items()})


def _tag_order(tag: str):
    if tag.startswith("level-"):
        try:
            return (0, int(tag[6:]), tag)
        except ValueError:
            pass
    return (1, 0, tag)


def export_fold_matrices(X, labels, ids, report: EvalReport, out_dir) -> list:
    """Write normalised, selected per-fold train/test CSVs for external classifiers."""
    from pathlib import Path

    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    row = {image_id: i for i, image_id in enumerate(ids)}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for st in report.fold_states:
        cols = list(st.selection.selected)
        header = "id,label," + ",".join(f"f{c}" for c in cols)
        for part, part_ids in (("train", st.train_ids), ("test", st.test_ids)):
            idx = [row[i] for i in part_ids]
            Z = st.selection.transform(st.normalizer.transform(X[idx]))
            path = out / f"fold{st.fold:02d}_{part}.csv"
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(header + "\n")
                for image_id, label, vals in zip(part_ids, y[idx], Z):
                    fh.write(f"{image_id},{label}," + ",".join(repr(float(v)) for v in vals) + "\n")
            written.append(path)
    return written
