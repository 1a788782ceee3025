"""Density-to-color mapping for choropleth fills.

Densities are compared in ``log10(1 + d)`` space, scaled either against the
county's own range (relative) or the national range (absolute).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from . import kernels
from .census_index import CountryIndex, CountyNode
from .errors import DomainError, InvalidRecord

DULL_BLEND = 0.5
DOMAIN_TOL = 1e-12


class ColorScheme(enum.Enum):
    JET = "jet"
    REDBLUE = "redblue"
    GREENRED = "greenred"
    GREENRED_DULL = "greenreddull"

    @property
    def code(self) -> int:
        return _SCHEME_CODES[self]

    @classmethod
    def parse(cls, text: str) -> ColorScheme:
        key = text.strip().lower().replace("-", "").replace("_", "")
        for s in cls:
            if s.value == key:
                return s
        raise ValueError(f"unknown color scheme {text!r}; choose from {[s.value for s in cls]}")


_SCHEME_CODES = {
    ColorScheme.JET: kernels.SCHEME_JET,
    ColorScheme.REDBLUE: kernels.SCHEME_REDBLUE,
    ColorScheme.GREENRED: kernels.SCHEME_GREENRED,
    ColorScheme.GREENRED_DULL: kernels.SCHEME_GREENRED_DULL,
}


class NormalizationMode(enum.Enum):
    RELATIVE = "relative"
    ABSOLUTE = "absolute"

    @classmethod
    def parse(cls, text: str) -> NormalizationMode:
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(
                f"unknown normalization mode {text!r}; choose from {[m.value for m in cls]}"
            ) from None


@dataclass(frozen=True)
class Rgb:
    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        for v in (self.r, self.g, self.b):
            if not (math.isfinite(v) and 0.0 <= v <= 1.0):
                raise InvalidRecord(f"color channel out of [0, 1]: {self}")

    @property
    def warmth(self) -> float:
        return self.r - self.b


@dataclass(frozen=True)
class DensityScale:
    lo: float
    hi: float
    mode: NormalizationMode
    scope_id: str

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise InvalidRecord(f"density scale lo > hi ({self.lo} > {self.hi})")


def transform(d: float) -> float:
    return math.log10(1.0 + d)


def density_scale(index: CountryIndex, county: CountyNode, mode: NormalizationMode) -> DensityScale:
    if mode is NormalizationMode.ABSOLUTE:
        lo, hi = index.density_bounds_absolute
        return DensityScale(transform(lo), transform(hi), mode, "US")
    ds = [b.demo.density for b in county.blocks]
    if not ds:
        ds = [0.0]
    return DensityScale(transform(min(ds)), transform(max(ds)), mode, county.geoid)


def normalize(d: float, scale: DensityScale) -> float:
    return kernels.unit_value(d, scale.lo, scale.hi)


def map_color(scheme: ColorScheme, u: float, dull_blend: float = DULL_BLEND) -> Rgb:
    if not (-DOMAIN_TOL <= u <= 1.0 + DOMAIN_TOL):
        raise DomainError(f"color position {u} outside [0, 1]")
    u = min(1.0, max(0.0, u))
    return Rgb(*kernels.rgb(scheme.code, u, dull_blend))


def rgb_to_kml_hex(c: Rgb, alpha: int) -> str:
    """``aabbggrr`` lowercase hex, the channel order KML expects."""
    if not 0 <= alpha <= 255:
        raise InvalidRecord(f"alpha must be a byte, got {alpha}")
    return kernels.kml_hex(c.r, c.g, c.b, alpha)


def kml_hex_to_rgb(text: str) -> tuple[Rgb, int]:
    a, b, g, r = (int(text[i:i + 2], 16) for i in range(0, 8, 2))
    return Rgb(r / 255, g / 255, b / 255), a


def block_fill_colors(
    densities, scheme: ColorScheme, scale: DensityScale, alpha: int,
    dull_blend: float = DULL_BLEND,
) -> list[str]:
    """Vectorized ``rgb_to_kml_hex(map_color(scheme, normalize(d)))``."""
    us = kernels.unit_values(densities, scale.lo, scale.hi)
    return kernels.kml_colors(us, scheme.code, alpha, dull_blend)
