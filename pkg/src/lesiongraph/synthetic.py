"""Synthetic two-class lesion corpus for smoke tests and demos.

Benign lesions are smooth round brown blobs; melanoma-class lesions are
irregular, with dark, blue-grey and reddish patches.  Run as a module to
write a corpus directory::

    python3 -m lesiongraph.synthetic out/corpus --per-class 20
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

SKIN = np.array([225.0, 190.0, 165.0])
BROWN = np.array([150.0, 95.0, 60.0])
MELANOMA_PALETTE = np.array([[45.0, 30.0, 30.0], [95.0, 105.0, 135.0], [170.0, 70.0, 70.0], [110.0, 60.0, 35.0]])


def _radial_grid(size: int, rng: np.random.Generator):
    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    cy, cx = size / 2 + rng.uniform(-size / 12, size / 12, 2)
    return np.hypot(yy - cy, xx - cx), np.arctan2(yy - cy, xx - cx)


def benign_image(size: int, rng: np.random.Generator) -> np.ndarray:
    r, _ = _radial_grid(size, rng)
    radius = size * rng.uniform(0.22, 0.3)
    alpha = np.clip((radius - r) / 2.0 + 0.5, 0.0, 1.0)[..., None]
    lesion = BROWN + rng.normal(0, 8, 3)
    img = SKIN * (1 - alpha) + lesion * alpha
    img += rng.normal(0, 4, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def melanoma_image(size: int, rng: np.random.Generator) -> np.ndarray:
    r, theta = _radial_grid(size, rng)
    radius = size * rng.uniform(0.25, 0.35)
    wobble = sum(rng.uniform(0.05, 0.18) * np.sin(k * theta + rng.uniform(0, 2 * np.pi)) for k in (2, 3, 5))
    inside = r < radius * (1 + wobble)
    field = ndimage.gaussian_filter(rng.normal(size=(size, size, len(MELANOMA_PALETTE))), size / 10)
    patch = MELANOMA_PALETTE[np.argmax(field, axis=2)]
    alpha = ndimage.gaussian_filter(inside.astype(np.float64), 1.0)[..., None]
    img = SKIN * (1 - alpha) + patch * alpha
    img += rng.normal(0, 6, img.shape)
    return np.clip(img, 0, 255).astype(np.uint8)


def make_corpus(root, per_class: int = 20, size: int = 64, seed: int = 0) -> Path:
    """Write ``images/<id>.png`` and ``labels.csv`` under ``root``."""
    root = Path(root)
    (root / "images").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    rows = []
    for label, make in (("benign", benign_image), ("melanoma", melanoma_image)):
        for i in range(per_class):
            image_id = f"{label[:3]}_{i:03d}"
            Image.fromarray(make(size, rng)).save(root / "images" / f"{image_id}.png")
            rows.append((image_id, label))
    with open(root / "labels.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["id", "label"])
        w.writerows(rows)
    return root


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description="write a synthetic two-class lesion corpus")
    p.add_argument("out")
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    make_corpus(args.out, args.per_class, args.size, args.seed)


if __name__ == "__main__":
    main()
