"""Hierarchical state -> county -> block-group boundary and demographics index.

The index is built once from flat entity records and is read-only afterwards,
so it can be shared by forked workers without copying.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    DanglingReference,
    DuplicateFips,
    EmptyInput,
    GeometryOutOfBbox,
    IndexBuildError,
    InvalidRecord,
    MalformedFips,
)

CONTAINMENT_TOL = 1e-6

STATE_DIGITS = 2
COUNTY_DIGITS = 3
BLOCK_DIGITS = 7
FIPS_LENGTH = STATE_DIGITS + COUNTY_DIGITS + BLOCK_DIGITS


@dataclass(frozen=True)
class BoundingBox:
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self) -> None:
        vals = (self.x_min, self.x_max, self.y_min, self.y_max)
        if not all(math.isfinite(v) for v in vals):
            raise InvalidRecord(f"non-finite bounding box {vals}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise InvalidRecord(f"inverted bounding box {vals}")
        if self.x_min < -180 or self.x_max > 180 or self.y_min < -90 or self.y_max > 90:
            raise InvalidRecord(f"bounding box outside lon/lat range {vals}")

    @classmethod
    def envelope(cls, xs: np.ndarray, ys: np.ndarray) -> BoundingBox:
        """Tight envelope of the finite vertices in ``xs``/``ys``."""
        mask = np.isfinite(xs) & np.isfinite(ys)
        if not mask.any():
            raise InvalidRecord("cannot compute the envelope of an empty geometry")
        return cls(
            float(xs[mask].min()), float(xs[mask].max()),
            float(ys[mask].min()), float(ys[mask].max()),
        )

    @classmethod
    def union(cls, boxes: Iterable[BoundingBox]) -> BoundingBox:
        boxes = list(boxes)
        return cls(
            min(b.x_min for b in boxes), max(b.x_max for b in boxes),
            min(b.y_min for b in boxes), max(b.y_max for b in boxes),
        )

    def as_list(self) -> list[float]:
        return [self.x_min, self.x_max, self.y_min, self.y_max]

    def contains(self, other: BoundingBox, tol: float = CONTAINMENT_TOL) -> bool:
        return (
            other.x_min >= self.x_min - tol
            and other.x_max <= self.x_max + tol
            and other.y_min >= self.y_min - tol
            and other.y_max <= self.y_max + tol
        )


def _frozen(a: Sequence[float] | np.ndarray) -> np.ndarray:
    arr = np.array(a, dtype=np.float64)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class PolygonGeometry:
    """Flat vertex arrays; a NaN in both arrays separates consecutive rings."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "y", _frozen(self.y))
        if self.x.shape != self.y.shape or self.x.ndim != 1:
            raise InvalidRecord("polygon x and y arrays must have equal length")
        if not np.array_equal(np.isnan(self.x), np.isnan(self.y)):
            raise InvalidRecord("ring break markers must appear in both x and y")

    @classmethod
    def from_rings(cls, rings: Sequence[Sequence[Sequence[float]]]) -> PolygonGeometry:
        xs: list[float] = []
        ys: list[float] = []
        for i, ring in enumerate(rings):
            if i:
                xs.append(math.nan)
                ys.append(math.nan)
            for lon, lat in ring:
                xs.append(float(lon))
                ys.append(float(lat))
        return cls(np.array(xs, dtype=np.float64), np.array(ys, dtype=np.float64))

    @classmethod
    def empty(cls) -> PolygonGeometry:
        return cls(np.empty(0), np.empty(0))

    def is_empty(self) -> bool:
        return self.x.size == 0

    def rings(self) -> list[tuple[np.ndarray, np.ndarray]]:
        if self.is_empty():
            return []
        breaks = np.flatnonzero(np.isnan(self.x))
        bounds = [-1, *breaks.tolist(), self.x.size]
        return [
            (self.x[a + 1:b], self.y[a + 1:b])
            for a, b in zip(bounds[:-1], bounds[1:])
        ]

    def ring_lists(self) -> list[list[list[float]]]:
        return [[[float(a), float(b)] for a, b in zip(rx, ry)] for rx, ry in self.rings()]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PolygonGeometry):
            return NotImplemented
        return np.array_equal(self.x, other.x, equal_nan=True) and np.array_equal(
            self.y, other.y, equal_nan=True
        )

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"PolygonGeometry(<{len(self.rings())} rings, {self.x.size} points>)"


@dataclass(frozen=True)
class Demographics:
    population: int
    median_age: float
    under_15: int
    over_65: int
    density: float

    def __post_init__(self) -> None:
        if min(self.population, self.under_15, self.over_65) < 0:
            raise InvalidRecord(f"negative count in {self}")
        if self.under_15 + self.over_65 > self.population:
            raise InvalidRecord(f"under_15 + over_65 exceeds population in {self}")
        if not (self.median_age >= 0 and self.density >= 0):
            raise InvalidRecord(f"negative or NaN median_age/density in {self}")


def parse_fips(full_fips: str) -> tuple[int, int, int]:
    """Split a 12-digit GEOID into (state_fp, county_fp, block_fp)."""
    if not isinstance(full_fips, str) or len(full_fips) != FIPS_LENGTH or not (
        full_fips.isascii() and full_fips.isdigit()
    ):
        raise MalformedFips(f"expected a {FIPS_LENGTH}-digit FIPS string, got {full_fips!r}")
    return (
        int(full_fips[:STATE_DIGITS]),
        int(full_fips[STATE_DIGITS:STATE_DIGITS + COUNTY_DIGITS]),
        int(full_fips[STATE_DIGITS + COUNTY_DIGITS:]),
    )


def make_fips(state_fp: int, county_fp: int, block_fp: int) -> str:
    return f"{state_fp:02d}{county_fp:03d}{block_fp:07d}"


@dataclass(frozen=True)
class BlockRecord:
    block_fp: int
    full_fips: str
    bbox: BoundingBox | None
    geometry: PolygonGeometry
    demo: Demographics

    @property
    def state_fp(self) -> int:
        return int(self.full_fips[:STATE_DIGITS])

    @property
    def county_fp(self) -> int:
        return int(self.full_fips[STATE_DIGITS:STATE_DIGITS + COUNTY_DIGITS])


@dataclass(frozen=True)
class StateMeta:
    state_fp: int
    name: str
    geometry: PolygonGeometry
    bbox: BoundingBox | None = None


@dataclass(frozen=True)
class CountyMeta:
    state_fp: int
    county_fp: int
    name: str
    geometry: PolygonGeometry
    bbox: BoundingBox | None = None


BuildRecord = Union[StateMeta, CountyMeta, BlockRecord]


@dataclass(frozen=True)
class CountyNode:
    state_fp: int
    county_fp: int
    name: str
    bbox: BoundingBox
    geometry: PolygonGeometry
    blocks: tuple[BlockRecord, ...]
    _keys: tuple[str, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_keys", tuple(b.full_fips for b in self.blocks))

    @property
    def geoid(self) -> str:
        return f"{self.state_fp:02d}{self.county_fp:03d}"

    def block(self, full_fips: str) -> BlockRecord | None:
        i = bisect.bisect_left(self._keys, full_fips)
        if i < len(self._keys) and self._keys[i] == full_fips:
            return self.blocks[i]
        return None


@dataclass(frozen=True)
class StateNode:
    state_fp: int
    name: str
    bbox: BoundingBox
    geometry: PolygonGeometry
    counties: tuple[CountyNode, ...]
    _keys: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_keys", tuple(c.county_fp for c in self.counties))

    def county(self, county_fp: int) -> CountyNode | None:
        i = bisect.bisect_left(self._keys, county_fp)
        if i < len(self._keys) and self._keys[i] == county_fp:
            return self.counties[i]
        return None


@dataclass(frozen=True)
class CountryIndex:
    states: tuple[StateNode, ...]
    density_bounds_absolute: tuple[float, float]
    _keys: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_keys", tuple(s.state_fp for s in self.states))

    def state(self, state_fp: int) -> StateNode | None:
        i = bisect.bisect_left(self._keys, state_fp)
        if i < len(self._keys) and self._keys[i] == state_fp:
            return self.states[i]
        return None

    def county(self, state_fp: int, county_fp: int) -> CountyNode | None:
        st = self.state(state_fp)
        return None if st is None else st.county(county_fp)

    def iter_counties(self):
        """Yield ``(state, county)`` pairs in ascending FIPS order."""
        for st in self.states:
            for co in st.counties:
                yield st, co

    def iter_blocks(self):
        for st in self.states:
            for co in st.counties:
                yield from co.blocks


def _check_vertices(geom: PolygonGeometry, bbox: BoundingBox, what: str) -> None:
    if geom.is_empty():
        return
    mask = ~np.isnan(geom.x)
    xs, ys = geom.x[mask], geom.y[mask]
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise GeometryOutOfBbox(f"{what}: non-finite vertex")
    tol = CONTAINMENT_TOL
    if (
        (xs < bbox.x_min - tol).any() or (xs > bbox.x_max + tol).any()
        or (ys < bbox.y_min - tol).any() or (ys > bbox.y_max + tol).any()
    ):
        raise GeometryOutOfBbox(f"{what}: vertex outside declared bbox {bbox.as_list()}")


def _resolve_bbox(
    declared: BoundingBox | None,
    geom: PolygonGeometry,
    children: Sequence[BoundingBox],
    what: str,
) -> BoundingBox:
    if declared is not None:
        _check_vertices(geom, declared, what)
        return declared
    if not geom.is_empty():
        return BoundingBox.envelope(geom.x, geom.y)
    if children:
        return BoundingBox.union(children)
    raise IndexBuildError(f"{what}: no bbox, no geometry and no children")


def build_index(records: Iterable[BuildRecord]) -> CountryIndex:
    """Validate flat entity records and assemble them into a CountryIndex.

    Declared bounding boxes win over geometry (vertices are checked against
    them); missing ones are computed as the vertex envelope, or from the
    children when the entity has no geometry of its own.
    """
    states: dict[int, StateMeta] = {}
    counties: dict[tuple[int, int], CountyMeta] = {}
    blocks: dict[tuple[int, int], list[BlockRecord]] = {}
    seen_fips: set[str] = set()
    n = 0

    for rec in records:
        n += 1
        if isinstance(rec, StateMeta):
            if rec.state_fp in states:
                raise DuplicateFips(f"state {rec.state_fp:02d} given twice")
            states[rec.state_fp] = rec
        elif isinstance(rec, CountyMeta):
            key = (rec.state_fp, rec.county_fp)
            if key in counties:
                raise DuplicateFips(f"county {rec.state_fp:02d}{rec.county_fp:03d} given twice")
            counties[key] = rec
        elif isinstance(rec, BlockRecord):
            s_fp, c_fp, b_fp = parse_fips(rec.full_fips)
            if b_fp != rec.block_fp:
                raise MalformedFips(
                    f"block_fp {rec.block_fp} disagrees with FIPS {rec.full_fips}"
                )
            if rec.full_fips in seen_fips:
                raise DuplicateFips(f"block {rec.full_fips} given twice")
            seen_fips.add(rec.full_fips)
            blocks.setdefault((s_fp, c_fp), []).append(rec)
        else:
            raise TypeError(f"unsupported build record {type(rec).__name__}")
    if n == 0:
        raise EmptyInput("no records to index")

    for s_fp, c_fp in blocks:
        if (s_fp, c_fp) not in counties:
            raise DanglingReference(f"blocks reference missing county {s_fp:02d}{c_fp:03d}")
    for s_fp, c_fp in counties:
        if s_fp not in states:
            raise DanglingReference(f"county {s_fp:02d}{c_fp:03d} references missing state")

    county_nodes: dict[int, list[CountyNode]] = {}
    for (s_fp, c_fp), meta in sorted(counties.items()):
        geoid = f"{s_fp:02d}{c_fp:03d}"
        built = []
        for b in sorted(blocks.get((s_fp, c_fp), []), key=lambda r: r.full_fips):
            bbox = _resolve_bbox(b.bbox, b.geometry, (), f"block {b.full_fips}")
            built.append(b if bbox is b.bbox else BlockRecord(
                b.block_fp, b.full_fips, bbox, b.geometry, b.demo))
        cbox = _resolve_bbox(meta.bbox, meta.geometry, [b.bbox for b in built], f"county {geoid}")
        for b in built:
            if not cbox.contains(b.bbox):
                raise GeometryOutOfBbox(f"block {b.full_fips} bbox not inside county {geoid}")
        county_nodes.setdefault(s_fp, []).append(
            CountyNode(s_fp, c_fp, meta.name, cbox, meta.geometry, tuple(built))
        )

    state_nodes = []
    for s_fp, meta in sorted(states.items()):
        cos = county_nodes.get(s_fp, [])
        sbox = _resolve_bbox(meta.bbox, meta.geometry, [c.bbox for c in cos], f"state {s_fp:02d}")
        for c in cos:
            if not sbox.contains(c.bbox):
                raise GeometryOutOfBbox(f"county {c.geoid} bbox not inside state {s_fp:02d}")
        state_nodes.append(StateNode(s_fp, meta.name, sbox, meta.geometry, tuple(cos)))

    densities = [b.demo.density for co in county_nodes.values() for c in co for b in c.blocks]
    bounds = (min(densities), max(densities)) if densities else (0.0, 0.0)
    return CountryIndex(tuple(state_nodes), bounds)


def lookup_block(index: CountryIndex, full_fips: str) -> BlockRecord | None:
    """Resolve a GEOID through state -> county -> block; ``None`` if absent."""
    s_fp, c_fp, _ = parse_fips(full_fips)
    county = index.county(s_fp, c_fp)
    return None if county is None else county.block(full_fips)


def entity_counts(index: CountryIndex) -> tuple[int, int, int]:
    n_counties = sum(len(s.counties) for s in index.states)
    n_blocks = sum(len(c.blocks) for s in index.states for c in s.counties)
    return len(index.states), n_counties, n_blocks
