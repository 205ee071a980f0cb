"""Whole-image colour, texture and shape descriptors (394 values by default).

Block layout, in order:

==========================  =====
RGB histograms (3 x 32)        96
Lab histograms (3 x 32)        96
GLCM statistics               160
lesion-mask shape              26
gradient orientations          16
==========================  =====
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from skimage.color import rgb2gray
from skimage.feature import graycomatrix, graycoprops
from skimage.filters import threshold_otsu
from skimage.measure import moments_central, moments_hu, moments_normalized, regionprops

from .color import to_lab

HIST_BINS = 32
GLCM_DISTANCES = (1, 2)
GLCM_ANGLES = (0.0, np.pi / 4, np.pi / 2, 3 * np.pi / 4)
GLCM_LEVELS = (8, 32)
GLCM_PROPS = ("contrast", "dissimilarity", "homogeneity", "energy", "correlation", "ASM",
              "mean", "variance", "entropy")
ORIENTATION_BINS = 16
LAB_RANGES = ((0.0, 100.0), (-128.0, 128.0), (-128.0, 128.0))

BLOCKS = (("rgb_hist", 96), ("lab_hist", 96), ("glcm", 160), ("shape", 26), ("gradient", 16))
N_FEATURES = sum(n for _, n in BLOCKS)


def _histograms(channels: np.ndarray, ranges) -> np.ndarray:
    out = []
    for c, (lo, hi) in enumerate(ranges):
        vals = np.clip(channels[..., c].ravel(), lo, hi)
        hist, _ = np.histogram(vals, bins=HIST_BINS, range=(lo, hi))
        out.append(hist / max(vals.size, 1))
    return np.concatenate(out)


def _glcm_block(gray: np.ndarray) -> np.ndarray:
    feats = []
    for levels in GLCM_LEVELS:
        q = np.minimum((gray * levels).astype(np.uint8), levels - 1)
        P = graycomatrix(q, distances=GLCM_DISTANCES, angles=GLCM_ANGLES, levels=levels,
                         symmetric=True, normed=True)
        stats = [graycoprops(P, prop) for prop in GLCM_PROPS]
        stats.append(P.max(axis=(0, 1)))
        # (n_props, n_dist, n_angle) -> distance, angle, prop
        feats.append(np.stack(stats, axis=-1).reshape(-1))
    out = np.concatenate(feats)
    return np.nan_to_num(out, nan=1.0)


def lesion_mask(gray: np.ndarray) -> np.ndarray:
    """Largest dark connected region after Otsu thresholding (holes filled)."""
    if np.ptp(gray) == 0:
        return np.ones_like(gray, dtype=bool)
    mask = gray <= threshold_otsu(gray)
    labels, count = ndimage.label(mask)
    if count == 0:
        return np.ones_like(gray, dtype=bool)
    sizes = np.bincount(labels.ravel())[1:]
    mask = labels == (int(np.argmax(sizes)) + 1)
    return ndimage.binary_fill_holes(mask)


def _shape_block(gray: np.ndarray) -> np.ndarray:
    mask = lesion_mask(gray)
    h, w = mask.shape
    img_area = float(h * w)
    props = regionprops(mask.astype(np.uint8))[0]
    area = float(props.area)
    perim = float(props.perimeter) or 1.0
    cy, cx = props.centroid
    diag = np.hypot(h, w)

    mu = moments_central(mask.astype(np.float64))
    hu = moments_hu(moments_normalized(mu, 3))
    hu = -np.sign(hu) * np.log10(np.abs(hu) + 1e-30)
    hu = np.where(np.isfinite(hu), hu, 0.0)

    flip_lr = np.fliplr(mask)
    flip_ud = np.flipud(mask)
    asym_lr = np.count_nonzero(mask ^ flip_lr) / max(area, 1.0)
    asym_ud = np.count_nonzero(mask ^ flip_ud) / max(area, 1.0)
    rows = np.nonzero(mask.any(axis=1))[0]
    cols = np.nonzero(mask.any(axis=0))[0]
    dt = ndimage.distance_transform_edt(mask)

    geometry = np.array([
        area / img_area,
        perim / (2 * (h + w)),
        4 * np.pi * area / perim**2,
        props.eccentricity,
        props.solidity,
        props.extent,
        props.major_axis_length / diag,
        props.minor_axis_length / diag,
        props.orientation,
        cy / h - 0.5,
        cx / w - 0.5,
        asym_lr,
        asym_ud,
        props.equivalent_diameter_area / diag,
        float(props.euler_number),
        (rows[-1] - rows[0] + 1) / h,
        (cols[-1] - cols[0] + 1) / w,
        dt.max() / diag,
        gray[mask].mean(),
    ])
    return np.concatenate([hu, geometry])


def _gradient_block(gray: np.ndarray) -> np.ndarray:
    gy = ndimage.sobel(gray, axis=0)
    gx = ndimage.sobel(gray, axis=1)
    mag = np.hypot(gx, gy)
    ang = np.arctan2(gy, gx)
    hist, _ = np.histogram(ang, bins=ORIENTATION_BINS, range=(-np.pi, np.pi), weights=mag)
    total = hist.sum()
    return hist / total if total > 0 else hist


def conventional_features(image) -> np.ndarray:
    px = np.asarray(getattr(image, "pixels", image))
    rgb = px.astype(np.float64) / 255.0
    gray = rgb2gray(px)
    values = np.concatenate([
        _histograms(rgb, ((0.0, 1.0),) * 3),
        _histograms(to_lab(px), LAB_RANGES),
        _glcm_block(gray),
        _shape_block(gray),
        _gradient_block(gray),
    ])
    assert values.size == N_FEATURES, values.size
    return np.nan_to_num(values, nan=0.0, posinf=0.0, neginf=0.0)
