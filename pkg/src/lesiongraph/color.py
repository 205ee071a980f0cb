"""Colour conversion helpers and the CIEDE2000 colour difference."""

from __future__ import annotations

import numpy as np
from skimage.color import rgb2lab

_25_POW_7 = 25.0**7


def to_lab(pixels: np.ndarray) -> np.ndarray:
    """uint8 RGB (H x W x 3) -> CIELAB under D65, float64."""
    return rgb2lab(np.asarray(pixels, dtype=np.float64) / 255.0)


def ciede2000(lab_a, lab_b) -> np.ndarray | float:
    """CIEDE2000 colour difference with unit weighting factors.

    Accepts single Lab triples or arrays of shape ``(..., 3)``; broadcasting
    follows numpy rules. Returns a float for scalar input.

    Examples
    --------
    >>> round(float(ciede2000((50.0, 2.6772, -79.7751), (50.0, 0.0, -82.7485))), 4)
    2.0425
    """
    a = np.asarray(lab_a, dtype=np.float64)
    b = np.asarray(lab_b, dtype=np.float64)
    scalar = a.ndim == 1 and b.ndim == 1
    L1, a1, b1 = a[..., 0], a[..., 1], a[..., 2]
    L2, a2, b2 = b[..., 0], b[..., 1], b[..., 2]

    c_bar = 0.5 * (np.hypot(a1, b1) + np.hypot(a2, b2))
    c_bar7 = c_bar**7
    g = 0.5 * (1.0 - np.sqrt(c_bar7 / (c_bar7 + _25_POW_7)))
    a1p = (1.0 + g) * a1
    a2p = (1.0 + g) * a2
    c1p = np.hypot(a1p, b1)
    c2p = np.hypot(a2p, b2)
    h1p = np.where((a1p == 0) & (b1 == 0), 0.0, np.degrees(np.arctan2(b1, a1p)) % 360.0)
    h2p = np.where((a2p == 0) & (b2 == 0), 0.0, np.degrees(np.arctan2(b2, a2p)) % 360.0)

    chroma_prod = c1p * c2p
    zero_chroma = chroma_prod == 0
    dh = h2p - h1p
    dh = np.where(dh > 180.0, dh - 360.0, np.where(dh < -180.0, dh + 360.0, dh))
    dh = np.where(zero_chroma, 0.0, dh)

    dL = L2 - L1
    dC = c2p - c1p
    dH = 2.0 * np.sqrt(chroma_prod) * np.sin(np.radians(dh) / 2.0)

    L_bar = 0.5 * (L1 + L2)
    C_bar = 0.5 * (c1p + c2p)
    h_sum = h1p + h2p
    h_bar = np.where(
        np.abs(h1p - h2p) <= 180.0,
        0.5 * h_sum,
        np.where(h_sum < 360.0, 0.5 * (h_sum + 360.0), 0.5 * (h_sum - 360.0)),
    )
    h_bar = np.where(zero_chroma, h_sum, h_bar)

    t = (1.0
         - 0.17 * np.cos(np.radians(h_bar - 30.0))
         + 0.24 * np.cos(np.radians(2.0 * h_bar))
         + 0.32 * np.cos(np.radians(3.0 * h_bar + 6.0))
         - 0.20 * np.cos(np.radians(4.0 * h_bar - 63.0)))
    d_theta = 30.0 * np.exp(-(((h_bar - 275.0) / 25.0) ** 2))
    C_bar7 = C_bar**7
    r_c = 2.0 * np.sqrt(C_bar7 / (C_bar7 + _25_POW_7))
    l_off = (L_bar - 50.0) ** 2
    s_l = 1.0 + 0.015 * l_off / np.sqrt(20.0 + l_off)
    s_c = 1.0 + 0.045 * C_bar
    s_h = 1.0 + 0.015 * C_bar * t
    r_t = -np.sin(np.radians(2.0 * d_theta)) * r_c

    tl, tc, th = dL / s_l, dC / s_c, dH / s_h
    de = np.sqrt(np.maximum(tl * tl + tc * tc + th * th + r_t * tc * th, 0.0))
    return float(de) if scalar else de
