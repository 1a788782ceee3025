"""Pure-Python reference kernels.

Every function here has a compiled twin in ``_ckernels.pyx`` that must return
bit-identical results; the floating-point operation order is kept the same on
both sides on purpose.
"""

from __future__ import annotations

import math

import numpy as np

EARTH_RADIUS_KM = 6371.0088

SCHEME_JET = 0
SCHEME_REDBLUE = 1
SCHEME_GREENRED = 2
SCHEME_GREENRED_DULL = 3


def haversine(lon1: float, lat1: float, lon2: float, lat2: float) -> float:
    dlat = math.radians(lat2 - lat1)
    dlon = math.radians(lon2 - lon1)
    # s*s rather than s**2: libm pow() is not always correctly rounded
    s1 = math.sin(dlat / 2)
    s2 = math.sin(dlon / 2)
    a = s1 * s1 + math.cos(math.radians(lat1)) * math.cos(math.radians(lat2)) * (s2 * s2)
    return 2 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(a)))


def haversine_many(lon0: float, lat0: float, lons, lats) -> np.ndarray:
    return np.array(
        [haversine(lon0, lat0, float(x), float(y)) for x, y in zip(lons, lats)],
        dtype=np.float64,
    )


def unit_value(d: float, lo: float, hi: float) -> float:
    if lo == hi:
        return 0.5
    v = (math.log10(1.0 + d) - lo) / (hi - lo)
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


def unit_values(densities, lo: float, hi: float) -> np.ndarray:
    return np.array([unit_value(float(d), lo, hi) for d in densities], dtype=np.float64)


def _clamp(v: float) -> float:
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


def rgb(scheme: int, u: float, blend: float) -> tuple[float, float, float]:
    if scheme == SCHEME_JET:
        return (
            _clamp(1.5 - abs(4.0 * u - 3.0)),
            _clamp(1.5 - abs(4.0 * u - 2.0)),
            _clamp(1.5 - abs(4.0 * u - 1.0)),
        )
    if scheme == SCHEME_REDBLUE:
        return (u, 0.0, 1.0 - u)
    if scheme == SCHEME_GREENRED:
        return (u, 1.0 - u, 0.0)
    if scheme == SCHEME_GREENRED_DULL:
        keep = 1.0 - blend
        gray = 0.5 * blend
        return (u * keep + gray, (1.0 - u) * keep + gray, 0.0 * keep + gray)
    raise ValueError(f"unknown scheme code {scheme}")


def kml_hex(r: float, g: float, b: float, alpha: int) -> str:
    return "%02x%02x%02x%02x" % (alpha, round(b * 255.0), round(g * 255.0), round(r * 255.0))


def kml_colors(us, scheme: int, alpha: int, blend: float) -> list[str]:
    return [kml_hex(*rgb(scheme, float(u), blend), alpha) for u in us]


def format_ring(xs, ys) -> str:
    return " ".join("%.7f,%.7f,0" % (float(x), float(y)) for x, y in zip(xs, ys))
