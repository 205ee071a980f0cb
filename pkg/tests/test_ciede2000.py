import csv
from pathlib import Path

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from lesiongraph.color import ciede2000, to_lab

DATA = Path(__file__).parent / "data" / "ciede2000_pairs.csv"


def _pairs():
    with open(DATA, newline="") as fh:
        rows = list(csv.DictReader(fh))
    a = np.array([[float(r["L1"]), float(r["a1"]), float(r["b1"])] for r in rows])
    b = np.array([[float(r["L2"]), float(r["a2"]), float(r["b2"])] for r in rows])
    return a, b, np.array([float(r["dE"]) for r in rows])


def test_published_pairs():
    a, b, expected = _pairs()
    assert len(expected) == 34
    np.testing.assert_allclose(ciede2000(a, b), expected, atol=1e-4)
    # also pair by pair through the scalar path
    for x, y, e in zip(a, b, expected):
        assert abs(ciede2000(x, y) - e) < 1e-4


def test_identity():
    assert ciede2000([50.0, 10.0, -20.0], [50.0, 10.0, -20.0]) == 0.0


lab = st.tuples(st.floats(0, 100), st.floats(-128, 127), st.floats(-128, 127))


@settings(max_examples=200, deadline=None)
@given(x=lab, y=lab)
def test_symmetric_nonnegative(x, y):
    d1, d2 = ciede2000(x, y), ciede2000(y, x)
    assert d1 >= 0
    assert abs(d1 - d2) <= 1e-9 * max(1.0, d1)


def test_to_lab_white_and_black():
    px = np.array([[[255, 255, 255], [0, 0, 0]]], np.uint8)
    out = to_lab(px)
    np.testing.assert_allclose(out[0, 0], [100, 0, 0], atol=1e-2)  # library white point is rounded
    np.testing.assert_allclose(out[0, 1], [0, 0, 0], atol=1e-3)
