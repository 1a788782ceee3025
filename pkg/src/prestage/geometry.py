"""Great-circle distance and radius membership over census blocks.

Membership is decided on the block's bbox center so that the spreadsheet
replica (one point formula per row) can reproduce the answer exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .census_index import BlockRecord, BoundingBox, CountyNode
from .errors import InvalidRecord

EARTH_RADIUS_KM = kernels.EARTH_RADIUS_KM


@dataclass(frozen=True)
class GeoPoint:
    lon: float
    lat: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lon) and math.isfinite(self.lat)):
            raise InvalidRecord(f"non-finite point ({self.lon}, {self.lat})")
        if not (-180 <= self.lon <= 180 and -90 <= self.lat <= 90):
            raise InvalidRecord(f"point out of range ({self.lon}, {self.lat})")


@dataclass(frozen=True)
class RadiusQuery:
    center: GeoPoint
    radius: float  # kilometers

    def __post_init__(self) -> None:
        if not (math.isfinite(self.radius) and self.radius >= 0):
            raise InvalidRecord(f"radius must be finite and >= 0, got {self.radius}")


@dataclass(frozen=True)
class AggregateDemographics:
    population: int
    under_15: int
    over_65: int
    mean_density: float  # population-weighted
    mean_of_medians: float  # unweighted mean of block median ages
    block_count: int


def bbox_center(b: BoundingBox) -> GeoPoint:
    return GeoPoint((b.x_min + b.x_max) / 2, (b.y_min + b.y_max) / 2)


def haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    return kernels.haversine(a.lon, a.lat, b.lon, b.lat)


def block_centers(blocks: Sequence[BlockRecord]) -> tuple[np.ndarray, np.ndarray]:
    lons = np.fromiter(((b.bbox.x_min + b.bbox.x_max) / 2 for b in blocks), np.float64, len(blocks))
    lats = np.fromiter(((b.bbox.y_min + b.bbox.y_max) / 2 for b in blocks), np.float64, len(blocks))
    return lons, lats


def blocks_within_radius(county: CountyNode, q: RadiusQuery) -> list[BlockRecord]:
    """Blocks whose bbox center is within ``q.radius`` km, ascending GEOID."""
    blocks = sorted(county.blocks, key=lambda b: b.full_fips)
    if not blocks:
        return []
    lons, lats = block_centers(blocks)
    dist = kernels.haversine_many(q.center.lon, q.center.lat, lons, lats)
    return [b for b, d in zip(blocks, dist) if d <= q.radius]


def aggregate_demographics(blocks: Sequence[BlockRecord]) -> AggregateDemographics:
    """Sum counts over ``blocks``; density and median age are reported as means.

    Empty input gives zeros everywhere, including the means.
    """
    pop = u15 = o65 = 0
    weighted = 0.0
    ages = 0.0
    for b in blocks:
        pop += b.demo.population
        u15 += b.demo.under_15
        o65 += b.demo.over_65
        weighted += b.demo.population * b.demo.density
        ages += b.demo.median_age
    n = len(blocks)
    return AggregateDemographics(
        population=pop,
        under_15=u15,
        over_65=o65,
        mean_density=weighted / pop if pop else 0.0,
        mean_of_medians=ages / n if n else 0.0,
        block_count=n,
    )
