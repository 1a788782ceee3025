import random

import pytest
from hypothesis import given, strategies as st

from prestage.errors import RangeError
from prestage.xlsx import DmsInput, decimal_to_dms, dm_to_decimal, dms_to_decimal


def test_examples():
    assert dms_to_decimal(DmsInput(42, 30, 0.0, "N")) == 42.5
    assert abs(dms_to_decimal(DmsInput(71, 6, 7.56, "W")) - -71.1021) <= 1e-9
    assert dm_to_decimal(71, 6.126, "W") == pytest.approx(-71.1021, abs=1e-9)
    assert dms_to_decimal(DmsInput(0, 0, 0.0, "S")) == 0.0


@pytest.mark.parametrize("args", [
    (10, 60, 0.0, "N"), (10, 0, 60.0, "N"), (-1, 0, 0.0, "N"), (1, 0, 0.0, "X"),
    (1, 0, float("nan"), "E"),
])
def test_range_errors(args):
    with pytest.raises(RangeError):
        DmsInput(*args)


def test_decimal_range_errors():
    with pytest.raises(RangeError):
        decimal_to_dms(90.5, "lat")
    with pytest.raises(RangeError):
        decimal_to_dms(-180.01, "lon")


def test_round_trip_1000():
    rng = random.Random(42)
    for _ in range(1000):
        axis = rng.choice(["lat", "lon"])
        lim = 90 if axis == "lat" else 180
        v = rng.uniform(-lim, lim)
        d = decimal_to_dms(v, axis)
        assert abs(dms_to_decimal(d) - v) <= 1e-9


@given(st.floats(-180, 180))
def test_round_trip_property(v):
    d = decimal_to_dms(v, "lon")
    assert d.hemisphere in ("E", "W")
    assert 0 <= d.minutes < 60 and 0 <= d.seconds < 60
    assert abs(dms_to_decimal(d) - v) <= 1e-9


def test_zero_hemispheres():
    assert decimal_to_dms(0.0, "lat").hemisphere == "N"
    assert decimal_to_dms(-0.0, "lon").hemisphere == "E"
