"""Corpus loading and stratified fold assignment."""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np
from PIL import Image

from .errors import CorpusError, FoldError

logger = logging.getLogger(__name__)

LABELS = ("benign", "melanoma")
IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".PNG", ".JPG", ".JPEG")
MIN_SIDE = 16


@dataclass(frozen=True)
class LabelledImage:
    """An RGB lesion image with its ground-truth class.

    ``pixels`` is an ``H x W x 3`` uint8 array and is made read-only on
    construction so instances can be shared between threads.
    """

    id: str
    pixels: np.ndarray = field(repr=False)
    label: str

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise CorpusError(f"image {self.id!r}: expected HxWx3 RGB array, got shape {px.shape}")
        if px.shape[0] < MIN_SIDE or px.shape[1] < MIN_SIDE:
            raise CorpusError(f"image {self.id!r}: {px.shape[0]}x{px.shape[1]} is smaller than {MIN_SIDE}x{MIN_SIDE}")
        if self.label not in LABELS:
            raise CorpusError(f"image {self.id!r}: unknown label {self.label!r}")
        if px.dtype != np.uint8:
            if px.min() < 0 or px.max() > 255:
                raise CorpusError(f"image {self.id!r}: pixel values outside [0, 255]")
            px = px.astype(np.uint8)
        px = np.ascontiguousarray(px)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def y(self) -> int:
        """1 for melanoma (the positive class), 0 for benign."""
        return int(self.label == "melanoma")

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape[:2]


def read_labels(labels_file: str | Path) -> list[tuple[str, str]]:
    """Parse an ``id,label`` CSV (header row required)."""
    rows: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(labels_file, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return rows
        if [h.strip().lower() for h in header[:2]] != ["id", "label"]:
            raise CorpusError(f"{labels_file}: header must be 'id,label', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2:
                raise CorpusError(f"{labels_file}:{lineno}: expected two columns")
            image_id, label = row[0].strip(), row[1].strip().lower()
            if label not in LABELS:
                raise CorpusError(f"{labels_file}:{lineno}: unknown label {row[1]!r} for id {image_id!r}")
            if image_id in seen:
                raise CorpusError(f"{labels_file}:{lineno}: duplicate id {image_id!r}")
            seen.add(image_id)
            rows.append((image_id, label))
    return rows


def find_image(images_dir: Path, image_id: str) -> Path:
    for suffix in IMAGE_SUFFIXES:
        candidate = images_dir / f"{image_id}{suffix}"
        if candidate.is_file():
            return candidate
    raise CorpusError(f"no image file for id {image_id!r} in {images_dir}")


def decode_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8)


def load_corpus(root_dir: str | Path, labels_file: str | Path | None = None, jobs: int = 1) -> list[LabelledImage]:
    """Load every image listed in the label CSV, in ascending id order.

    Images are read from ``root_dir/images/<id>.{png,jpg}``; the label file
    defaults to ``root_dir/labels.csv``. Images are kept at native resolution.
    """
    root = Path(root_dir)
    labels_path = Path(labels_file) if labels_file is not None else root / "labels.csv"
    images_dir = root / "images"
    rows = sorted(read_labels(labels_path))
    paths = [find_image(images_dir, image_id) for image_id, _ in rows]

    if jobs > 1 and len(paths) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            pixel_arrays = list(pool.map(decode_image, paths))
    else:
        pixel_arrays = [decode_image(p) for p in paths]

    corpus = [LabelledImage(image_id, px, label) for (image_id, label), px in zip(rows, pixel_arrays)]
    logger.info("loaded %d images from %s", len(corpus), root)
    return corpus


@dataclass(frozen=True)
class FoldAssignment:
    fold_of: Mapping[str, int]
    k: int
    seed: int

    def __post_init__(self):
        for image_id, fold in self.fold_of.items():
            if not 0 <= fold < self.k:
                raise FoldError(f"fold index {fold} for {image_id!r} outside [0, {self.k})")

    def test_ids(self, fold: int) -> list[str]:
        return sorted(i for i, f in self.fold_of.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        return sorted(i for i, f in self.fold_of.items() if f != fold)

    def to_json(self) -> dict:
        return {"k": self.k, "seed": self.seed, "assignments": {i: self.fold_of[i] for i in sorted(self.fold_of)}}

    @classmethod
    def from_json(cls, payload: Mapping) -> "FoldAssignment":
        return cls(fold_of={str(k): int(v) for k, v in payload["assignments"].items()},
                   k=int(payload["k"]), seed=int(payload["seed"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "FoldAssignment":
        return cls.from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def stratified_folds(labels: Iterable[tuple[str, str]], k: int = 10, seed: int = 42) -> FoldAssignment:
    """Assign ids to ``k`` folds, stratified by class.

    Each class is sorted, shuffled with a seeded generator and dealt
    round-robin. The dealing position carries over from one class to the
    next so that fold sizes also stay within one of each other.
    """
    if k < 2:
        raise FoldError(f"k must be >= 2, got {k}")
    by_class: dict[str, list[str]] = {}
    seen: set[str] = set()
    for image_id, label in labels:
        if image_id in seen:
            raise FoldError(f"duplicate id {image_id!r}")
        seen.add(image_id)
        by_class.setdefault(label, []).append(image_id)
    for label, ids in by_class.items():
        if len(ids) < k:
            raise FoldError(f"class {label!r} has {len(ids)} members, fewer than k={k}")

    rng = np.random.default_rng(seed)
    fold_of: dict[str, int] = {}
    position = 0
    for label in sorted(by_class):
        ids = sorted(by_class[label])
        order = rng.permutation(len(ids))
        for idx in order:
            fold_of[ids[idx]] = position % k
            position += 1
    return FoldAssignment(fold_of=fold_of, k=k, seed=seed)
