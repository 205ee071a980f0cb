import warnings

import numpy as np

from lesiongraph.conventional import BLOCKS, N_FEATURES, conventional_features, lesion_mask


def test_length_is_394():
    assert N_FEATURES == 394
    img = np.random.default_rng(0).integers(0, 256, (48, 56, 3)).astype(np.uint8)
    assert conventional_features(img).shape == (394,)


def test_uniform_image_one_bin_per_channel():
    img = np.full((32, 32, 3), (200, 120, 40), np.uint8)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        v = conventional_features(img)
    hist = v[:192].reshape(6, 32)
    assert np.all(np.count_nonzero(hist, axis=1) == 1)
    np.testing.assert_allclose(hist.sum(axis=1), 1.0)


def test_noise_images_finite():
    rng = np.random.default_rng(1)
    for _ in range(5):
        img = rng.integers(0, 256, (40, 40, 3)).astype(np.uint8)
        assert np.all(np.isfinite(conventional_features(img)))


def test_block_sizes():
    assert dict(BLOCKS) == {"rgb_hist": 96, "lab_hist": 96, "glcm": 160, "shape": 26, "gradient": 16}


def test_mask_picks_dark_blob():
    gray = np.ones((30, 30))
    gray[10:20, 5:15] = 0.2
    gray[2, 25] = 0.1
    mask = lesion_mask(gray)
    assert mask[15, 10] and not mask[2, 25] and mask.sum() == 100
