import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qslbound import __version__
from qslbound.output import SIG_DIGITS, exact_difference, fmt, metadata, rounded, write_table


def test_fmt():
    assert fmt(1 / 3) == "0.333333333333"
    assert fmt(2) == "2" and fmt(True) == "1"
    assert fmt(float("nan")) == "nan" and fmt(-math.inf) == "-inf"
    assert fmt("Forward") == "Forward"
    assert fmt(1.23456789012345e-20) == "1.23456789012e-20"


@given(st.floats(allow_nan=False, allow_infinity=False, width=64))
def test_rounded_is_stable(x):
    assert rounded(rounded(x)) == rounded(x)
    if x != 0:
        assert abs(rounded(x) - x) <= 10 ** (1 - SIG_DIGITS) * abs(x)


@given(st.floats(min_value=-1e6, max_value=1e6), st.floats(min_value=-1e6, max_value=1e6))
def test_exact_difference_recomputes(a, b):
    # a reader parsing the printed columns gets exactly the printed slack
    assert float(exact_difference(a, b)) == float(fmt(a)) - float(fmt(b))


def test_write_table(tmp_path):
    meta = metadata("bounds", convention="appendix", steps=64, extra={"k": 1})
    p = write_table(tmp_path / "t.csv", ("a", "b"), [(1.0, "x"), (0.5, "y")], meta)
    assert p.read_text() == "a,b\n1,x\n0.5,y\n"
    side = json.loads((tmp_path / "t.meta.json").read_text())
    assert side["rows"] == 2 and side["columns"] == ["a", "b"] and side["version"] == __version__
    for key in ("convention", "steps", "quadrature", "tolerances", "significant_digits"):
        assert key in side
    assert side["tolerances"]["validity"] == pytest.approx(1e-9)
