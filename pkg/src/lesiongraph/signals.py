"""Per-superpixel descriptors (colour, geometric, texture) and nodal signal matrices."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from skimage.color import rgb2gray
from skimage.measure import regionprops

from .color import to_lab
from .superpixel import SuperpixelMap

KINDS = ("color", "geometric", "texture")
DIMS = {"color": 9, "geometric": 6, "texture": 8}
GLCM_LEVELS = 8

COLOR_NAMES = ("mean_r", "mean_g", "mean_b", "mean_L", "mean_a", "mean_b_lab", "std_r", "std_g", "std_b")
GEOMETRIC_NAMES = ("area", "perimeter", "compactness", "eccentricity", "solidity", "center_distance")
TEXTURE_NAMES = ("gray_mean", "gray_std", "skewness", "kurtosis", "contrast", "energy", "homogeneity", "correlation")


@dataclass(frozen=True)
class NodalSignalMatrix:
    X: np.ndarray
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}")
        X = np.array(self.X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != DIMS[self.kind]:
            raise ValueError(f"{self.kind} signal matrix must be n x {DIMS[self.kind]}, got {X.shape}")
        if not np.all(np.isfinite(X)):
            raise ValueError("signal matrix contains NaN or Inf")
        X.setflags(write=False)
        object.__setattr__(self, "X", X)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]


def _pixels(image) -> np.ndarray:
    return np.asarray(getattr(image, "pixels", image))


# ---------------------------------------------------------------- per node


def color_descriptor(image, smap: SuperpixelMap, node_index: int) -> np.ndarray:
    px = _pixels(image)
    mask = smap.labels == node_index
    rgb = px[mask].astype(np.float64) / 255.0
    lab = to_lab(px)[mask]
    return np.concatenate([rgb.mean(axis=0), lab.mean(axis=0), rgb.std(axis=0)])


def crack_perimeter(mask: np.ndarray) -> int:
    """Number of pixel edges separating the mask from its complement (image border included)."""
    padded = np.pad(mask, 1, constant_values=False)
    inner = padded[1:-1, 1:-1]
    total = 0
    for shifted in (padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:]):
        total += int(np.count_nonzero(inner & ~shifted))
    return total


def _eccentricity(rows: np.ndarray, cols: np.ndarray) -> float:
    if rows.size < 2:
        return 0.0
    cov = np.cov(np.vstack([rows, cols]).astype(np.float64), bias=True)
    lo, hi = np.linalg.eigvalsh(cov)
    if hi <= 0:
        return 0.0
    return float(np.sqrt(max(0.0, 1.0 - max(lo, 0.0) / hi)))


def _center_distance(cy: float, cx: float, shape: tuple[int, int]) -> float:
    h, w = shape
    half_diag = np.hypot((h - 1) / 2.0, (w - 1) / 2.0)
    if half_diag == 0:
        return 0.0
    return float(np.hypot(cy - (h - 1) / 2.0, cx - (w - 1) / 2.0) / half_diag)


def geometric_descriptor(smap: SuperpixelMap, node_index: int) -> np.ndarray:
    """[area, perimeter, compactness, eccentricity, solidity, centroid distance].

    Perimeter counts exposed pixel edges, so a 10 x 10 square has perimeter 40.
    The centroid distance is relative to the half-diagonal and is the one
    feature that changes when a superpixel is translated.
    """
    mask = smap.labels == node_index
    rows, cols = np.nonzero(mask)
    area = float(rows.size)
    perim = float(crack_perimeter(mask))
    props = regionprops(mask.astype(np.uint8))[0]
    return np.array([
        area,
        perim,
        4.0 * np.pi * area / perim**2,
        _eccentricity(rows, cols),
        float(props.solidity),
        _center_distance(rows.mean(), cols.mean(), smap.shape),
    ])


def _moments(values: np.ndarray) -> tuple[float, float, float, float]:
    mean = values.mean()
    centred = values - mean
    var = np.mean(centred**2)
    std = np.sqrt(var)
    if var <= 1e-24:
        return float(mean), 0.0, 0.0, 0.0
    skew = np.mean(centred**3) / var**1.5
    kurt = np.mean(centred**4) / var**2 - 3.0
    return float(mean), float(std), float(skew), float(kurt)


def quantize(gray: np.ndarray, levels: int = GLCM_LEVELS) -> np.ndarray:
    return np.minimum((gray * levels).astype(np.int64), levels - 1)


def glcm_features(P: np.ndarray) -> np.ndarray:
    """[contrast, energy, homogeneity, correlation] of a co-occurrence count matrix.

    An empty matrix (no pixel pairs) gives ``[0, 1, 0, 0]``. Zero-variance
    matrices have correlation 1.
    """
    total = P.sum()
    if total == 0:
        return np.array([0.0, 1.0, 0.0, 0.0])
    P = P / total
    lv = P.shape[0]
    i, j = np.ogrid[:lv, :lv]
    contrast = np.sum(P * (i - j) ** 2)
    energy = np.sqrt(np.sum(P**2))
    homogeneity = np.sum(P / (1.0 + (i - j) ** 2))
    mu_i = np.sum(i * P)
    mu_j = np.sum(j * P)
    var_i = np.sum((i - mu_i) ** 2 * P)
    var_j = np.sum((j - mu_j) ** 2 * P)
    if var_i < 1e-15 or var_j < 1e-15:
        corr = 1.0
    else:
        corr = np.sum((i - mu_i) * (j - mu_j) * P) / np.sqrt(var_i * var_j)
    return np.array([contrast, energy, homogeneity, corr], dtype=np.float64)


def node_glcm(qgray: np.ndarray, mask: np.ndarray, levels: int = GLCM_LEVELS) -> np.ndarray:
    """Symmetric horizontal (offset (0, 1)) co-occurrence counts inside ``mask``."""
    both = mask[:, :-1] & mask[:, 1:]
    a = qgray[:, :-1][both]
    b = qgray[:, 1:][both]
    P = np.zeros((levels, levels), dtype=np.float64)
    np.add.at(P, (a, b), 1.0)
    return P + P.T


def texture_descriptor(image, smap: SuperpixelMap, node_index: int) -> np.ndarray:
    gray = rgb2gray(_pixels(image))
    mask = smap.labels == node_index
    rows, cols = np.nonzero(mask)
    r0, r1, c0, c1 = rows.min(), rows.max() + 1, cols.min(), cols.max() + 1
    box_mask = mask[r0:r1, c0:c1]
    box_q = quantize(gray[r0:r1, c0:c1])
    stats = _moments(gray[mask])
    return np.concatenate([stats, glcm_features(node_glcm(box_q, box_mask))])


# ---------------------------------------------------------------- all nodes


def _color_matrix(px: np.ndarray, labels: np.ndarray, n: int) -> np.ndarray:
    flat = labels.ravel()
    counts = np.bincount(flat, minlength=n).astype(np.float64)
    rgb = px.reshape(-1, 3).astype(np.float64) / 255.0
    lab = to_lab(px).reshape(-1, 3)
    out = np.empty((n, 9))
    for c in range(3):
        out[:, c] = np.bincount(flat, weights=rgb[:, c], minlength=n) / counts
        out[:, 3 + c] = np.bincount(flat, weights=lab[:, c], minlength=n) / counts
        # two-pass population std
        dev = rgb[:, c] - out[flat, c]
        out[:, 6 + c] = np.sqrt(np.bincount(flat, weights=dev**2, minlength=n) / counts)
    return out


def _geometric_matrix(labels: np.ndarray, n: int) -> np.ndarray:
    h, w = labels.shape
    flat = labels.ravel()
    area = np.bincount(flat, minlength=n).astype(np.float64)
    padded = np.pad(labels, 1, constant_values=-1)
    inner = padded[1:-1, 1:-1]
    perim = np.zeros(n)
    for shifted in (padded[:-2, 1:-1], padded[2:, 1:-1], padded[1:-1, :-2], padded[1:-1, 2:]):
        perim += np.bincount(inner[inner != shifted], minlength=n)
    out = np.empty((n, 6))
    out[:, 0] = area
    out[:, 1] = perim
    out[:, 2] = 4.0 * np.pi * area / perim**2
    for prop in regionprops(labels + 1):
        node = prop.label - 1
        coords = prop.coords
        out[node, 3] = _eccentricity(coords[:, 0], coords[:, 1])
        out[node, 4] = prop.solidity
        out[node, 5] = _center_distance(coords[:, 0].mean(), coords[:, 1].mean(), (h, w))
    return out


def _texture_matrix(px: np.ndarray, labels: np.ndarray, n: int) -> np.ndarray:
    gray = rgb2gray(px)
    flat = labels.ravel()
    g = gray.ravel()
    order = np.argsort(flat, kind="stable")
    bounds = np.searchsorted(flat[order], np.arange(n + 1))
    out = np.empty((n, 8))
    for node in range(n):
        out[node, :4] = _moments(g[order[bounds[node]:bounds[node + 1]]])

    q = quantize(gray)
    same = labels[:, :-1] == labels[:, 1:]
    node_of_pair = labels[:, :-1][same]
    a = q[:, :-1][same]
    b = q[:, 1:][same]
    lv = GLCM_LEVELS
    counts = np.bincount(node_of_pair * lv * lv + a * lv + b, minlength=n * lv * lv).reshape(n, lv, lv)
    counts = counts + counts.transpose(0, 2, 1)
    for node in range(n):
        out[node, 4:] = glcm_features(counts[node].astype(np.float64))
    return out


def build_signal_matrix(image, smap: SuperpixelMap, kind: str) -> NodalSignalMatrix:
    """Stack the ``kind`` descriptor of every node into an ``n x m`` matrix."""
    px = _pixels(image)
    if px.shape[:2] != smap.shape:
        raise ValueError(f"map shape {smap.shape} does not match image shape {px.shape[:2]}")
    if kind == "color":
        X = _color_matrix(px, smap.labels, smap.n)
    elif kind == "geometric":
        X = _geometric_matrix(smap.labels, smap.n)
    elif kind == "texture":
        X = _texture_matrix(px, smap.labels, smap.n)
    else:
        raise ValueError(f"unknown signal kind {kind!r}")
    return NodalSignalMatrix(X, kind)


SPAN_RTOL = 1e-12


def minmax_columns(X: np.ndarray) -> np.ndarray:
    """Scale each column to [0, 1] across nodes; constant columns become 0.

    A column counts as constant when its span is at rounding level relative
    to its magnitude, so accumulation noise is not stretched to [0, 1].
    """
    X = np.asarray(X, dtype=np.float64)
    if not X.size:
        return X.copy()
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    scale = np.maximum(np.abs(X).max(axis=0), 1.0)
    varying = span > SPAN_RTOL * scale
    safe = np.where(varying, span, 1.0)
    return np.where(varying, (X - lo) / safe, 0.0)
