import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lesiongraph.signals import (DIMS, KINDS, build_signal_matrix, color_descriptor, crack_perimeter,
                                 geometric_descriptor, glcm_features, minmax_columns, node_glcm, quantize,
                                 texture_descriptor)
from lesiongraph.superpixel import SuperpixelMap, slic_segment


def whole(h, w):
    return SuperpixelMap(np.zeros((h, w), np.int32), 1)


def test_uniform_gray_colour():
    px = np.full((12, 12, 3), 127.5).round().astype(np.uint8)
    v = color_descriptor(px, whole(12, 12), 0)
    np.testing.assert_allclose(v[:3], 128 / 255)
    np.testing.assert_allclose(v[6:], 0.0, atol=1e-12)


def test_pure_red():
    px = np.zeros((10, 10, 3), np.uint8)
    px[..., 0] = 255
    v = color_descriptor(px, whole(10, 10), 0)
    np.testing.assert_allclose(v[:3], [1.0, 0.0, 0.0])


def test_checkerboard_std():
    yy, xx = np.mgrid[0:16, 0:16]
    px = np.repeat((((yy + xx) % 2) * 255).astype(np.uint8)[..., None], 3, axis=2)
    v = color_descriptor(px, whole(16, 16), 0)
    # population std of an equal mix of 0 and 1 is 0.5
    assert v[0] == pytest.approx(0.5)
    assert v[6] == pytest.approx(0.5)


def test_single_node_area():
    assert geometric_descriptor(whole(13, 17), 0)[0] == 13 * 17


def test_square_perimeter_and_compactness():
    lab = np.ones((20, 20), np.int32)
    lab[5:15, 5:15] = 0
    smap = SuperpixelMap(lab, 2)
    mask = smap.labels == 0
    # brute force: count pixel edges facing a non-member (or the border)
    exposed = 0
    for r, c in zip(*np.nonzero(mask)):
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            exposed += not (0 <= rr < 20 and 0 <= cc < 20 and mask[rr, cc])
    assert crack_perimeter(mask) == exposed == 40
    g = geometric_descriptor(smap, 0)
    assert g[1] == 40
    assert g[2] == pytest.approx(4 * np.pi * 100 / 40**2)
    assert g[2] == pytest.approx(0.785, abs=1e-3)


def test_centre_node_distance_zero():
    assert geometric_descriptor(whole(21, 21), 0)[5] == pytest.approx(0.0, abs=1e-12)
    lab = np.zeros((21, 21), np.int32)
    lab[8:13, 8:13] = 1
    assert geometric_descriptor(SuperpixelMap(lab, 2), 1)[5] == pytest.approx(0.0, abs=1e-12)


def test_uniform_texture():
    px = np.full((10, 10, 3), 90, np.uint8)
    t = texture_descriptor(px, whole(10, 10), 0)
    assert t[1] == 0.0
    assert t[4] == 0.0  # contrast
    assert t[5] == pytest.approx(1.0)  # energy


def _brute_glcm(q, mask, levels):
    P = np.zeros((levels, levels))
    h, w = q.shape
    for r in range(h):
        for c in range(w - 1):
            if mask[r, c] and mask[r, c + 1]:
                P[q[r, c], q[r, c + 1]] += 1
                P[q[r, c + 1], q[r, c]] += 1
    return P


def test_stripe_contrast_matches_hand_count():
    gray = np.tile([0.0, 1.0], (6, 4))  # vertical stripes, 6 x 8
    q = quantize(gray)
    mask = np.ones_like(q, dtype=bool)
    P = _brute_glcm(q, mask, 8)
    assert np.array_equal(node_glcm(q, mask), P)
    # every horizontal neighbour pair is (0, 7) or (7, 0): 6 rows x 7 pairs, both orders
    assert P[0, 7] == P[7, 0] == 42
    Pn = P / P.sum()
    expected_contrast = sum(Pn[i, j] * (i - j) ** 2 for i in range(8) for j in range(8))
    assert expected_contrast == pytest.approx(49.0)
    px = np.repeat((gray * 255).astype(np.uint8)[..., None], 3, axis=2)
    t = texture_descriptor(px, whole(6, 8), 0)
    assert t[4] == pytest.approx(expected_contrast)


def test_glcm_degenerate_cases():
    np.testing.assert_array_equal(glcm_features(np.zeros((8, 8))), [0, 1, 0, 0])
    P = np.zeros((8, 8))
    P[3, 3] = 10
    f = glcm_features(P)
    assert f[3] == 1.0 and f[0] == 0.0


@pytest.mark.parametrize("kind", KINDS)
def test_one_pixel_nodes_finite(kind):
    lab = np.arange(16, dtype=np.int32).reshape(4, 4)
    rng = np.random.default_rng(0)
    px = rng.integers(0, 256, (4, 4, 3)).astype(np.uint8)
    sm = build_signal_matrix(px, SuperpixelMap(lab, 16), kind)
    assert sm.X.shape == (16, DIMS[kind]) and np.all(np.isfinite(sm.X))


@pytest.fixture(scope="module")
def scene():
    rng = np.random.default_rng(5)
    yy, xx = np.mgrid[0:60, 0:64]
    px = np.where(((yy - 30) ** 2 + (xx - 30) ** 2 < 300)[..., None], [90, 50, 40], [210, 180, 150])
    px = np.clip(px + rng.normal(0, 15, (60, 64, 3)), 0, 255).astype(np.uint8)
    return px, slic_segment(px, 20)


@pytest.mark.parametrize("kind", KINDS)
def test_matrix_matches_per_node(scene, kind):
    px, smap = scene
    sm = build_signal_matrix(px, smap, kind)
    assert sm.X.shape == (20, DIMS[kind])
    for i in range(smap.n):
        if kind == "color":
            ref = color_descriptor(px, smap, i)
        elif kind == "geometric":
            ref = geometric_descriptor(smap, i)
        else:
            ref = texture_descriptor(px, smap, i)
        np.testing.assert_allclose(sm.X[i], ref, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
def test_permuting_labels_permutes_rows(scene, kind):
    px, smap = scene
    perm = np.random.default_rng(1).permutation(smap.n)
    # SuperpixelMap does not require canonical numbering, so a permuted map is valid
    permuted = SuperpixelMap(perm[smap.labels], smap.n)
    a = build_signal_matrix(px, smap, kind).X
    b = build_signal_matrix(px, permuted, kind).X
    np.testing.assert_allclose(b[perm], a, rtol=1e-12, atol=1e-12)


def test_identical_superpixels_identical_rows():
    px = np.zeros((10, 20, 3), np.uint8)
    px[:, :, 1] = np.tile(np.arange(10) * 20, 2)[None, :]
    lab = np.repeat([0, 1], 10)[None, :].repeat(10, axis=0).astype(np.int32)
    smap = SuperpixelMap(lab, 2)
    for kind in ("color", "texture"):
        X = build_signal_matrix(px, smap, kind).X
        np.testing.assert_allclose(X[0], X[1])


@pytest.mark.parametrize("kind", ["color", "texture"])
def test_translation_invariant(kind):
    rng = np.random.default_rng(2)
    patch = rng.integers(0, 256, (8, 8, 3)).astype(np.uint8)
    outs = []
    for r0, c0 in ((2, 3), (20, 15)):
        px = np.full((32, 32, 3), 200, np.uint8)
        px[r0:r0 + 8, c0:c0 + 8] = patch
        lab = np.zeros((32, 32), np.int32)
        lab[r0:r0 + 8, c0:c0 + 8] = 1
        outs.append(build_signal_matrix(px, SuperpixelMap(lab, 2), kind).X[1])
    np.testing.assert_allclose(outs[0], outs[1], rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(2, 12), st.integers(1, 6), st.integers(0, 10**6))
def test_minmax_columns_range(n, m, seed):
    X = np.random.default_rng(seed).normal(size=(n, m)) * 10
    X[:, 0] = 3.0
    Y = minmax_columns(X)
    assert np.all(Y >= 0) and np.all(Y <= 1)
    assert np.all(Y[:, 0] == 0)


def test_minmax_ignores_rounding_noise():
    X = np.array([[0.47058823529411620, 1.4e-15, 5.0], [0.47058823529411625, 1.3e-15, 7.0]])
    np.testing.assert_array_equal(minmax_columns(X), [[0, 0, 0], [0, 0, 1]])


def test_uniform_image_color_rows_identical():
    img = np.full((32, 32, 3), 120, np.uint8)
    smap = slic_segment(img, 4)
    assert np.all(minmax_columns(build_signal_matrix(img, smap, "color").X) == 0)
