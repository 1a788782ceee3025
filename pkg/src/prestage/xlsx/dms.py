"""Degrees-minutes-seconds <-> decimal degree conversion."""

from __future__ import annotations

import math
from dataclasses import dataclass

from ..errors import RangeError

_SIGNS = {"N": 1, "E": 1, "S": -1, "W": -1}
_AXIS_LIMIT = {"lat": 90.0, "lon": 180.0}


@dataclass(frozen=True)
class DmsInput:
    degrees: int
    minutes: int
    seconds: float
    hemisphere: str

    def __post_init__(self) -> None:
        if self.hemisphere not in _SIGNS:
            raise RangeError(f"hemisphere must be one of N/S/E/W, got {self.hemisphere!r}")
        if self.degrees < 0:
            raise RangeError("degrees must be >= 0; the hemisphere carries the sign")
        if not 0 <= self.minutes < 60:
            raise RangeError(f"minutes out of [0, 60): {self.minutes}")
        if not (math.isfinite(self.seconds) and 0 <= self.seconds < 60):
            raise RangeError(f"seconds out of [0, 60): {self.seconds}")

    @property
    def sign(self) -> int:
        return _SIGNS[self.hemisphere]


def dms_to_decimal(d: DmsInput) -> float:
    # same operation order as the worksheet's conversion formula
    return d.sign * (d.degrees + d.minutes / 60 + d.seconds / 3600)


def dm_to_decimal(degrees: int, minutes: float, hemisphere: str) -> float:
    """Degrees + decimal minutes form."""
    if hemisphere not in _SIGNS:
        raise RangeError(f"hemisphere must be one of N/S/E/W, got {hemisphere!r}")
    if degrees < 0:
        raise RangeError("degrees must be >= 0; the hemisphere carries the sign")
    if not (math.isfinite(minutes) and 0 <= minutes < 60):
        raise RangeError(f"minutes out of [0, 60): {minutes}")
    return _SIGNS[hemisphere] * (degrees + minutes / 60)


def decimal_to_dms(v: float, axis: str) -> DmsInput:
    if axis not in _AXIS_LIMIT:
        raise ValueError(f"axis must be 'lat' or 'lon', got {axis!r}")
    if not (math.isfinite(v) and abs(v) <= _AXIS_LIMIT[axis]):
        raise RangeError(f"{v} outside the {axis} range")
    if axis == "lat":
        hemi = "S" if v < 0 else "N"
    else:
        hemi = "W" if v < 0 else "E"
    a = abs(v)
    deg = math.floor(a)
    rem = (a - deg) * 60
    minutes = math.floor(rem)
    seconds = (rem - minutes) * 60
    if seconds >= 60:
        seconds -= 60
        minutes += 1
    if minutes >= 60:
        minutes -= 60
        deg += 1
    return DmsInput(int(deg), int(minutes), seconds, hemi)
