"""Superpixel maps: single-level SLIC plus ensemble and hierarchy families.

Node indices are always canonical: nodes are numbered in order of their
first pixel in raster (row-major) order. This makes every map a
deterministic function of the pixel partition alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from skimage.measure import label as connected_components
from skimage.segmentation import slic

from .color import ciede2000, to_lab
from .errors import SegmentationError

SEG_LEVELS = (20, 40, 60, 80, 100)
SHG_LEVELS = (5, 10, 20, 40, 80)
DEFAULT_COMPACTNESS = 10.0


@dataclass(frozen=True)
class SuperpixelMap:
    labels: np.ndarray
    n: int
    level_index: int = 0

    def __post_init__(self):
        lab = np.ascontiguousarray(self.labels, dtype=np.int32)
        if lab.ndim != 2:
            raise SegmentationError(f"label map must be 2-D, got shape {lab.shape}")
        counts = np.bincount(lab.ravel(), minlength=self.n) if lab.size else np.zeros(0, int)
        if lab.min(initial=0) < 0 or counts.size != self.n or np.any(counts == 0):
            raise SegmentationError(f"labels must take exactly the values 0..{self.n - 1}")
        lab.setflags(write=False)
        object.__setattr__(self, "labels", lab)

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels.ravel(), minlength=self.n)

    def is_connected(self) -> bool:
        """True when every node's pixel set is 4-connected."""
        comps = connected_components(self.labels, background=-1, connectivity=1)
        return int(comps.max()) == self.n


@dataclass(frozen=True)
class MultiLevelMaps:
    """Maps ordered coarse to fine.

    In hierarchy mode ``parents[l][i]`` is the node of ``maps[l]`` that
    contains node ``i`` of ``maps[l + 1]``. Ensemble mode has no parents.
    """

    maps: tuple[SuperpixelMap, ...]
    mode: str
    parents: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if self.mode not in ("ensemble", "hierarchy"):
            raise SegmentationError(f"unknown mode {self.mode!r}")
        if self.mode == "ensemble" and self.parents is not None:
            raise SegmentationError("ensemble maps carry no parent links")
        if self.mode == "hierarchy":
            if self.parents is None or len(self.parents) != len(self.maps) - 1:
                raise SegmentationError("hierarchy needs one parent array per adjacent level pair")

    @property
    def levels(self) -> list[int]:
        return [m.n for m in self.maps]


def canonical_relabel(labels: np.ndarray) -> tuple[np.ndarray, int]:
    """Renumber labels 0..n-1 by order of first raster appearance."""
    flat = np.asarray(labels).ravel()
    _, first, inverse = np.unique(flat, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int32)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size, dtype=np.int32)
    return rank[inverse].reshape(np.shape(labels)), int(first.size)


def _pixels(image) -> np.ndarray:
    return np.asarray(getattr(image, "pixels", image))


class RegionGraph:
    """Region adjacency graph supporting repeated pairwise merges.

    Tracks region sizes, 4-neighbour shared-boundary lengths and per-region
    colour sums so that merged-region means stay exact.
    """

    def __init__(self, labels: np.ndarray, lab: np.ndarray | None = None):
        self.labels = np.asarray(labels)
        n = int(self.labels.max()) + 1
        flat = self.labels.ravel()
        self.size = np.bincount(flat, minlength=n).astype(np.int64)
        self.owner = np.arange(n)
        self.members = {i: [i] for i in range(n)}
        self.alive = set(range(n))
        self.lab_sum = None
        if lab is not None:
            lab2 = lab.reshape(-1, 3)
            self.lab_sum = np.stack([np.bincount(flat, weights=lab2[:, c], minlength=n) for c in range(3)], axis=1)
        self.adj: dict[int, dict[int, int]] = {i: {} for i in range(n)}
        for a, b in ((self.labels[:, :-1], self.labels[:, 1:]), (self.labels[:-1, :], self.labels[1:, :])):
            a = a.ravel()
            b = b.ravel()
            diff = a != b
            lo = np.minimum(a[diff], b[diff]).astype(np.int64)
            hi = np.maximum(a[diff], b[diff]).astype(np.int64)
            keys, counts = np.unique(lo * n + hi, return_counts=True)
            for key, cnt in zip(keys.tolist(), counts.tolist()):
                i, j = divmod(key, n)
                self.adj[i][j] = self.adj[i].get(j, 0) + cnt
                self.adj[j][i] = self.adj[j].get(i, 0) + cnt

    def __len__(self):
        return len(self.alive)

    def mean_lab(self, region: int) -> np.ndarray:
        return self.lab_sum[region] / self.size[region]

    def merge(self, keep: int, gone: int) -> None:
        for nb, cnt in self.adj.pop(gone).items():
            del self.adj[nb][gone]
            if nb == keep:
                continue
            self.adj[keep][nb] = self.adj[keep].get(nb, 0) + cnt
            self.adj[nb][keep] = self.adj[nb].get(keep, 0) + cnt
        self.size[keep] += self.size[gone]
        self.size[gone] = 0
        if self.lab_sum is not None:
            self.lab_sum[keep] += self.lab_sum[gone]
            self.lab_sum[gone] = 0.0
        moved = self.members.pop(gone)
        self.owner[moved] = keep
        self.members[keep].extend(moved)
        self.alive.discard(gone)

    def current_labels(self) -> np.ndarray:
        return self.owner[self.labels]

    def absorb_smallest(self) -> None:
        """Merge the smallest region into the neighbour sharing the longest boundary."""
        smallest = min(self.alive, key=lambda r: (self.size[r], r))
        neighbours = self.adj[smallest]
        if not neighbours:
            raise SegmentationError("cannot merge an isolated region")
        target = min(neighbours, key=lambda r: (-neighbours[r], r))
        self.merge(target, smallest)


def _merge_fragments(labels: np.ndarray) -> np.ndarray:
    """Make every label 4-connected.

    For each label the largest connected piece keeps the label; every other
    piece is absorbed by the neighbour it shares the longest boundary with.
    """
    comps = connected_components(labels, background=-1, connectivity=1)
    comps, n_comp = canonical_relabel(comps)
    orig = np.zeros(n_comp, dtype=np.int64)
    orig[comps.ravel()] = labels.ravel()
    if n_comp == np.unique(labels).size:
        return labels
    sizes = np.bincount(comps.ravel(), minlength=n_comp)
    keeper = {}
    for c in range(n_comp):
        o = int(orig[c])
        if o not in keeper or sizes[c] > sizes[keeper[o]]:
            keeper[o] = c
    fragments = sorted((c for c in range(n_comp) if keeper[int(orig[c])] != c), key=lambda c: (sizes[c], c))
    rag = RegionGraph(comps)
    for frag in fragments:
        nbs = rag.adj[frag]
        target = min(nbs, key=lambda r: (-nbs[r], r))
        rag.merge(target, frag)
    return rag.current_labels()


def grid_labels(h: int, w: int, n_min: int) -> np.ndarray:
    """Regular rectangular grid with at least ``n_min`` cells (``n_min <= h*w``)."""
    rows = min(h, max(1, int(math.ceil(math.sqrt(n_min * h / w)))))
    cols = min(w, int(math.ceil(n_min / rows)))
    while rows * cols < n_min:
        rows = min(h, rows + 1)
        cols = min(w, int(math.ceil(n_min / rows)))
    r_idx = np.arange(h) * rows // h
    c_idx = np.arange(w) * cols // w
    return (r_idx[:, None] * cols + c_idx[None, :]).astype(np.int32)


def slic_segment(image, n_target: int, compactness: float = DEFAULT_COMPACTNESS,
                 exact_n: bool = True, level_index: int = 0) -> SuperpixelMap:
    """Segment an image into roughly ``n_target`` connected superpixels with SLIC.

    With ``exact_n`` the SLIC request is raised until it yields at least
    ``n_target`` regions, and the smallest regions are then absorbed by
    their neighbours until exactly ``n_target`` remain.
    """
    px = _pixels(image)
    h, w = px.shape[:2]
    if not 1 <= n_target <= h * w:
        raise SegmentationError(f"n_target={n_target} outside [1, {h * w}] for a {h}x{w} image")
    if compactness <= 0:
        raise SegmentationError("compactness must be positive")
    if n_target == 1:
        return SuperpixelMap(np.zeros((h, w), dtype=np.int32), 1, level_index)

    def run(request: int) -> np.ndarray:
        raw = slic(px, n_segments=request, compactness=compactness, start_label=0,
                   enforce_connectivity=True, channel_axis=-1, convert2lab=True)
        return canonical_relabel(_merge_fragments(raw))[0]

    labels = run(n_target)
    if exact_n:
        request = n_target
        attempts = 0
        while labels.max() + 1 < n_target and attempts < 8:
            request = int(math.ceil(request * 1.25)) + 1
            labels = run(min(request, h * w))
            attempts += 1
        if labels.max() + 1 < n_target:
            labels = grid_labels(h, w, n_target)
        if labels.max() + 1 > n_target:
            rag = RegionGraph(labels)
            while len(rag) > n_target:
                rag.absorb_smallest()
            labels = rag.current_labels()
    labels, n = canonical_relabel(labels)
    return SuperpixelMap(labels, n, level_index)


def _check_levels(levels: Sequence[int]) -> list[int]:
    levels = [int(x) for x in levels]
    if not levels:
        raise SegmentationError("levels must be non-empty")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise SegmentationError(f"levels must be strictly increasing, got {levels}")
    if levels[0] < 1:
        raise SegmentationError("level sizes must be >= 1")
    return levels


def build_ensemble(image, levels: Sequence[int] = SEG_LEVELS, compactness: float = DEFAULT_COMPACTNESS,
                   exact_n: bool = True) -> MultiLevelMaps:
    """Segment each level independently (superpixel ensemble)."""
    levels = _check_levels(levels)
    maps = tuple(slic_segment(image, n, compactness, exact_n, level_index=i) for i, n in enumerate(levels))
    return MultiLevelMaps(maps=maps, mode="ensemble")


def hierarchy_from_map(image, finest: SuperpixelMap, levels: Sequence[int]) -> MultiLevelMaps:
    """Coarsen ``finest`` by greedy colour merging, snapshotting at each level.

    At every step the spatially adjacent pair whose mean Lab colours have the
    smallest CIEDE2000 difference is merged (ties: lowest region ids).
    """
    levels = _check_levels(levels)
    if finest.n < levels[-1]:
        raise SegmentationError(f"finest map has {finest.n} nodes, fewer than the largest level {levels[-1]}")
    rag = RegionGraph(finest.labels, to_lab(_pixels(image)))

    snapshots: dict[int, np.ndarray] = {}
    for target in reversed(levels):
        while len(rag) > target:
            pairs = sorted((a, b) for a in rag.alive for b in rag.adj[a] if a < b)
            if not pairs:
                raise SegmentationError("no adjacent regions left to merge")
            pa = np.array(pairs)
            means = rag.lab_sum / np.maximum(rag.size, 1)[:, None]
            dist = ciede2000(means[pa[:, 0]], means[pa[:, 1]])
            a, b = pairs[int(np.argmin(dist))]
            rag.merge(a, b)
        snapshots[target] = rag.owner.copy()

    maps = []
    fine_to_level = []
    for i, target in enumerate(levels):
        owner = snapshots[target]
        labels, n = canonical_relabel(owner[finest.labels])
        maps.append(SuperpixelMap(labels, n, level_index=i))
        # finest node -> node index at this level
        lookup = np.empty(finest.n, dtype=np.int64)
        lookup[finest.labels.ravel()] = labels.ravel()
        fine_to_level.append(lookup)

    parents = []
    for i in range(len(levels) - 1):
        child = maps[i + 1]
        representative = np.zeros(child.n, dtype=np.int64)
        representative[fine_to_level[i + 1]] = np.arange(finest.n)
        parents.append(fine_to_level[i][representative].astype(np.int32))
    return MultiLevelMaps(maps=tuple(maps), mode="hierarchy", parents=tuple(parents))


def build_hierarchy(image, levels: Sequence[int] = SHG_LEVELS, compactness: float = DEFAULT_COMPACTNESS,
                    exact_n: bool = True) -> MultiLevelMaps:
    """Superpixel hierarchy: SLIC at the finest level, greedy CIEDE2000 merging above it."""
    levels = _check_levels(levels)
    finest = slic_segment(image, levels[-1], compactness, exact_n)
    return hierarchy_from_map(image, finest, levels)


def build_maps(image, mode: str, levels: Sequence[int], compactness: float = DEFAULT_COMPACTNESS,
               exact_n: bool = True) -> MultiLevelMaps:
    if mode in ("seg", "ensemble"):
        return build_ensemble(image, levels, compactness, exact_n)
    if mode in ("shg", "hierarchy"):
        return build_hierarchy(image, levels, compactness, exact_n)
    raise SegmentationError(f"unknown segmentation mode {mode!r}")
