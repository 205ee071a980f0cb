import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from skimage.segmentation import slic

from lesiongraph.errors import SegmentationError
from lesiongraph.ingest import LabelledImage
from lesiongraph.superpixel import (SuperpixelMap, build_ensemble, build_hierarchy, build_maps,
                                    canonical_relabel, grid_labels, hierarchy_from_map, slic_segment)


def _image(px, label="benign"):
    return LabelledImage("t", np.asarray(px, dtype=np.uint8), label)


@pytest.fixture(scope="module")
def lesion():
    rng = np.random.default_rng(3)
    yy, xx = np.mgrid[0:72, 0:80]
    inside = (yy - 36) ** 2 + (xx - 40) ** 2 < 22 ** 2
    px = np.where(inside[..., None], [120, 70, 40], [220, 185, 160]) + rng.normal(0, 6, (72, 80, 3))
    return _image(np.clip(px, 0, 255))


def test_single_target_covers_image(lesion):
    m = slic_segment(lesion, 1)
    assert m.n == 1 and np.all(m.labels == 0)


def test_uniform_image_four_regions():
    img = _image(np.full((100, 100, 3), 128))
    m = slic_segment(img, 4)
    assert m.n == 4
    assert np.all(np.abs(m.sizes() - 2500) <= 500)
    # reference: the library SLIC on the same input, no post-processing
    ref = slic(img.pixels, n_segments=4, compactness=10, start_label=0, channel_axis=-1)
    ref_sizes = np.sort(np.bincount(ref.ravel()))
    assert np.array_equal(np.sort(m.sizes()), ref_sizes)


def test_map_invariants(lesion):
    for n in (5, 20, 60):
        m = slic_segment(lesion, n)
        assert m.n == n
        assert np.all(m.sizes() > 0)
        assert m.is_connected()
        # canonical numbering: first raster appearance is increasing
        first = [np.flatnonzero(m.labels.ravel() == i)[0] for i in range(m.n)]
        assert first == sorted(first)


def test_slic_deterministic(lesion):
    a, b = slic_segment(lesion, 40), slic_segment(lesion, 40)
    assert np.array_equal(a.labels, b.labels)


def test_noise_image_reaches_exact_count():
    rng = np.random.default_rng(0)
    img = _image(rng.integers(0, 256, (48, 48, 3)))
    m = slic_segment(img, 30)
    assert m.n == 30 and m.is_connected()


def test_without_exact_n_stays_close(lesion):
    m = slic_segment(lesion, 40, exact_n=False)
    assert 0.5 * 40 <= m.n <= 1.5 * 40


def test_invalid_targets(lesion):
    with pytest.raises(SegmentationError):
        slic_segment(lesion, 0)
    with pytest.raises(SegmentationError):
        slic_segment(lesion, 10, compactness=0)


def test_ensemble_levels(lesion):
    maps = build_ensemble(lesion, (20, 40, 60, 80, 100))
    assert maps.mode == "ensemble" and maps.parents is None
    for m, target in zip(maps.maps, (20, 40, 60, 80, 100)):
        assert abs(m.n - target) <= 0.2 * target
    assert [m.level_index for m in maps.maps] == [0, 1, 2, 3, 4]
    assert build_ensemble(lesion, (1,)).levels == [1]


def test_ensemble_levels_independent(lesion):
    a = build_ensemble(lesion, (10, 30))
    b = build_ensemble(lesion, (30,))
    assert np.array_equal(a.maps[1].labels, b.maps[0].labels)


def test_levels_must_increase(lesion):
    with pytest.raises(SegmentationError):
        build_ensemble(lesion, (40, 20))
    with pytest.raises(SegmentationError):
        build_maps(lesion, "quadtree", (10,))


def _check_hierarchy(maps):
    for l in range(len(maps.maps) - 1):
        coarse, fine, parent = maps.maps[l], maps.maps[l + 1], maps.parents[l]
        assert fine.n > coarse.n
        assert np.array_equal(parent[fine.labels], coarse.labels)
        assert set(parent.tolist()) == set(range(coarse.n))


def test_hierarchy_counts_and_consistency(lesion):
    maps = build_hierarchy(lesion, (40, 80))
    assert maps.levels == [40, 80]
    _check_hierarchy(maps)
    full = build_hierarchy(lesion)
    assert full.levels == [5, 10, 20, 40, 80]
    _check_hierarchy(full)


def test_hierarchy_single_level(lesion):
    finest = slic_segment(lesion, 30)
    maps = hierarchy_from_map(lesion, finest, (30,))
    assert maps.levels == [30] and maps.parents == ()
    assert np.array_equal(maps.maps[0].labels, finest.labels)


def test_two_colour_halves_merge_within_colour():
    px = np.zeros((20, 40, 3), np.uint8)
    px[:, :20] = (200, 30, 30)
    px[:, 20:] = (30, 30, 200)
    finest = SuperpixelMap(np.repeat(np.arange(4), 10)[None, :].repeat(20, axis=0), 4)
    maps = hierarchy_from_map(_image(px), finest, (2, 3, 4))
    three = maps.maps[1]
    # the first merge joins one same-colour pair; columns 0-9 and 10-19 are both red
    assert three.n == 3
    assert len(np.unique(three.labels[:, :20])) == 1 or len(np.unique(three.labels[:, 20:])) == 1
    two = maps.maps[0]
    assert np.all(two.labels[:, :20] == two.labels[0, 0])
    assert np.all(two.labels[:, 20:] == two.labels[0, 39])
    assert two.labels[0, 0] != two.labels[0, 39]


def test_canonical_relabel_is_partition_function():
    lab = np.array([[5, 5, 2], [9, 2, 2]])
    out, n = canonical_relabel(lab)
    assert n == 3 and out.tolist() == [[0, 0, 1], [2, 1, 1]]


@settings(max_examples=40, deadline=None)
@given(h=st.integers(4, 40), w=st.integers(4, 40), n=st.integers(1, 16))
def test_grid_labels_cover(h, w, n):
    lab = grid_labels(h, w, n)
    counts = np.bincount(lab.ravel())
    assert counts.size >= min(n, h * w) and np.all(counts > 0)


def test_map_validation():
    with pytest.raises(SegmentationError):
        SuperpixelMap(np.array([[0, 2]]), 3)
    with pytest.raises(SegmentationError):
        SuperpixelMap(np.zeros(4, int), 1)
