"""Boundary-bundle JSON reading/writing and seeded synthetic datasets.

Bundle layout::

    {"format_version": 1,
     "entities": [
        {"kind": "state", "state_fp": 25, "name": "Massachusetts",
         "bbox": [x_min, x_max, y_min, y_max], "rings": [[[lon, lat], ...], ...]},
        {"kind": "county", "state_fp": 25, "county_fp": 17, ...},
        {"kind": "block", "state_fp": 25, "county_fp": 17, "block_fp": 3531012,
         "rings": [...], "demographics": {"population": 1116, "median_age": 27.1,
                                          "under_15": 120, "over_65": 45,
                                          "density": 13950.0}}]}

``name`` and ``bbox`` are optional; unknown keys are ignored.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Any

from .census_index import (
    BlockRecord,
    BoundingBox,
    BuildRecord,
    CountryIndex,
    CountyMeta,
    Demographics,
    PolygonGeometry,
    StateMeta,
    build_index,
    make_fips,
)
from .errors import (
    BundleSyntaxError,
    CapacityError,
    DanglingReference,
    InvalidRecord,
    SchemaError,
    VersionError,
)

FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)

KIND_ORDER = {"state": 0, "county": 1, "block": 2}


# -- parsing -----------------------------------------------------------------

def _entity_id(ent: dict) -> str | None:
    parts = []
    for key, width in (("state_fp", 2), ("county_fp", 3), ("block_fp", 7)):
        v = ent.get(key)
        if not isinstance(v, int) or isinstance(v, bool):
            break
        parts.append(f"{v:0{width}d}")
    return "".join(parts) or None


def _need(ent: dict, key: str, kind: str, types: tuple = (int,)) -> Any:
    if key not in ent:
        raise SchemaError(f"missing required field {key!r}", kind, _entity_id(ent))
    v = ent[key]
    if isinstance(v, bool) or not isinstance(v, types):
        raise SchemaError(f"field {key!r} has the wrong type", kind, _entity_id(ent))
    return v


def _fp(ent: dict, key: str, kind: str, digits: int) -> int:
    v = _need(ent, key, kind)
    if not 0 <= v < 10**digits:
        raise SchemaError(f"{key} {v} does not fit in {digits} digits", kind, _entity_id(ent))
    return v


def _number(v: Any) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _rings(ent: dict, kind: str) -> PolygonGeometry:
    rings = ent.get("rings", [])
    ok = isinstance(rings, list) and all(
        isinstance(r, list)
        and all(isinstance(p, list) and len(p) == 2 and all(_number(c) for c in p) for p in r)
        for r in rings
    )
    if not ok:
        raise SchemaError("rings must be a list of [[lon, lat], ...] lists", kind, _entity_id(ent))
    return PolygonGeometry.from_rings(rings)


def _bbox(ent: dict, kind: str) -> BoundingBox | None:
    if ent.get("bbox") is None:
        return None
    bb = ent["bbox"]
    if not (isinstance(bb, list) and len(bb) == 4 and all(_number(v) for v in bb)):
        raise SchemaError("bbox must be [x_min, x_max, y_min, y_max]", kind, _entity_id(ent))
    try:
        return BoundingBox(*(float(v) for v in bb))
    except InvalidRecord as exc:
        raise SchemaError(str(exc), kind, _entity_id(ent)) from None


def _demographics(ent: dict) -> Demographics:
    fips = _entity_id(ent)
    d = ent.get("demographics")
    if not isinstance(d, dict):
        raise SchemaError("missing required field 'demographics'", "block", fips)
    vals = {}
    for key, integral in (("population", True), ("median_age", False), ("under_15", True),
                          ("over_65", True), ("density", False)):
        if key not in d:
            raise SchemaError(f"missing required field 'demographics.{key}'", "block", fips)
        v = d[key]
        if not _number(v) or (integral and not (isinstance(v, int) or float(v).is_integer())):
            raise SchemaError(f"demographics.{key} has the wrong type", "block", fips)
        vals[key] = int(v) if integral else float(v)
    try:
        return Demographics(**vals)
    except InvalidRecord as exc:
        raise SchemaError(str(exc), "block", fips) from None


def _decode(data: bytes | str) -> Any:
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BundleSyntaxError(f"invalid UTF-8: {exc.reason}", exc.start) from None
    else:
        text = data
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        offset = len(text[:exc.pos].encode("utf-8"))
        raise BundleSyntaxError(f"malformed JSON: {exc.msg}", offset) from None


def parse_bundle(data: bytes | str) -> list[BuildRecord]:
    """Decode a bundle into ``build_index`` records (states, counties, blocks)."""
    doc = _decode(data)
    if not isinstance(doc, dict):
        raise SchemaError("bundle must be a JSON object")
    version = doc.get("format_version")
    if version not in SUPPORTED_VERSIONS or isinstance(version, bool):
        raise VersionError(f"unsupported format_version {version!r}")
    entities = doc.get("entities")
    if not isinstance(entities, list):
        raise SchemaError("missing required field 'entities'")

    records: list[BuildRecord] = []
    counties: set[tuple[int, int]] = set()
    states: set[int] = set()
    blocks: list[BlockRecord] = []
    for ent in entities:
        if not isinstance(ent, dict):
            raise SchemaError("entity must be a JSON object")
        kind = ent.get("kind")
        if kind not in KIND_ORDER:
            raise SchemaError(f"unknown entity kind {kind!r}", None, _entity_id(ent))
        name = ent.get("name") or ""
        if not isinstance(name, str):
            raise SchemaError("name must be a string", kind, _entity_id(ent))
        s_fp = _fp(ent, "state_fp", kind, 2)
        if kind == "state":
            states.add(s_fp)
            records.append(StateMeta(s_fp, name, _rings(ent, kind), _bbox(ent, kind)))
            continue
        c_fp = _fp(ent, "county_fp", kind, 3)
        if kind == "county":
            counties.add((s_fp, c_fp))
            records.append(CountyMeta(s_fp, c_fp, name, _rings(ent, kind), _bbox(ent, kind)))
            continue
        b_fp = _fp(ent, "block_fp", kind, 7)
        rec = BlockRecord(b_fp, make_fips(s_fp, c_fp, b_fp), _bbox(ent, kind),
                          _rings(ent, kind), _demographics(ent))
        blocks.append(rec)
        records.append(rec)

    for b in blocks:
        if (b.state_fp, b.county_fp) not in counties:
            raise DanglingReference(f"block {b.full_fips} has no county entity in the bundle")
    for s_fp, c_fp in counties:
        if s_fp not in states:
            raise DanglingReference(f"county {s_fp:02d}{c_fp:03d} has no state entity in the bundle")
    return records


# -- serialization -----------------------------------------------------------

def _entity(kind: str, name: str | None, bbox: BoundingBox, geom: PolygonGeometry, **ids) -> dict:
    ent: dict[str, Any] = {"kind": kind, **ids}
    if name:
        ent["name"] = name
    ent["bbox"] = bbox.as_list()
    ent["rings"] = geom.ring_lists()
    return ent


def index_entities(index: CountryIndex) -> list[dict]:
    out = []
    for st in index.states:
        out.append(_entity("state", st.name, st.bbox, st.geometry, state_fp=st.state_fp))
        for co in st.counties:
            out.append(_entity("county", co.name, co.bbox, co.geometry,
                               state_fp=st.state_fp, county_fp=co.county_fp))
            for b in co.blocks:
                ent = _entity("block", None, b.bbox, b.geometry, state_fp=st.state_fp,
                              county_fp=co.county_fp, block_fp=b.block_fp)
                d = b.demo
                ent["demographics"] = {
                    "population": d.population,
                    "median_age": float(d.median_age),
                    "under_15": d.under_15,
                    "over_65": d.over_65,
                    "density": float(d.density),
                }
                out.append(ent)
    return out


def serialize_bundle(index: CountryIndex) -> bytes:
    """Canonical bundle bytes: sorted keys, hierarchical FIPS order, repr floats."""
    doc = {"format_version": FORMAT_VERSION, "entities": index_entities(index)}
    return (json.dumps(doc, sort_keys=True, ensure_ascii=False, allow_nan=False,
                       separators=(",", ":")) + "\n").encode("utf-8")


# -- synthetic data ----------------------------------------------------------

@dataclass(frozen=True)
class SyntheticSpec:
    seed: int
    num_states: int
    counties_per_state: int
    blocks_per_county: int
    density_range: tuple[float, float] = (5.0, 50000.0)
    block_size_deg: float = 0.01
    origin: tuple[float, float] = (-124.0, 25.0)

    def __post_init__(self) -> None:
        if self.seed < 0:
            raise InvalidRecord("seed must be non-negative")
        if min(self.num_states, self.counties_per_state, self.blocks_per_county) < 1:
            raise InvalidRecord("all synthetic counts must be >= 1")
        lo, hi = self.density_range
        if not (0 <= lo <= hi):
            raise InvalidRecord(f"bad density_range {self.density_range}")
        if not self.block_size_deg > 0:
            raise InvalidRecord("block_size_deg must be positive")


def _grid(n: int) -> tuple[int, int]:
    cols = math.ceil(math.sqrt(n))
    return cols, math.ceil(n / cols)


def _rect(x0: float, x1: float, y0: float, y1: float) -> PolygonGeometry:
    return PolygonGeometry.from_rings([[(x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)]])


def synthetic_fps(i: int, kind: str) -> int:
    """FIPS numbering of the ``i``-th synthetic entity (0-based) of a kind."""
    if kind == "state":
        return i + 1
    if kind == "county":
        return 2 * i + 1
    return 100001 + i


def generate_synthetic(spec: SyntheticSpec) -> list[BuildRecord]:
    """Rectangular blocks tiled in county rectangles tiled in state rectangles.

    Pure function of ``spec``. Densities are drawn log-uniformly inside
    ``density_range`` (each block's nominal area is then population / density).
    """
    bc, br = _grid(spec.blocks_per_county)
    cc, cr = _grid(spec.counties_per_state)
    sc, sr = _grid(spec.num_states)
    width_units = sc * cc * bc
    height_units = sr * cr * br
    x0, y0 = spec.origin
    step = spec.block_size_deg
    if x0 + width_units * step > 180 or y0 + height_units * step > 90 or x0 < -180 or y0 < -90:
        raise CapacityError(
            f"a {width_units}x{height_units} block grid of {step} deg cells does not fit "
            f"in lon/lat range from origin {spec.origin}"
        )

    def gx(k: int) -> float:
        return x0 + k * step

    def gy(k: int) -> float:
        return y0 + k * step

    rng = random.Random(spec.seed)
    t_lo = math.log10(1.0 + spec.density_range[0])
    t_hi = math.log10(1.0 + spec.density_range[1])

    records: list[BuildRecord] = []
    for si in range(spec.num_states):
        s_fp = synthetic_fps(si, "state")
        sx, sy = (si % sc) * cc * bc, (si // sc) * cr * br
        records.append(StateMeta(s_fp, f"State {s_fp:02d}",
                                 _rect(gx(sx), gx(sx + cc * bc), gy(sy), gy(sy + cr * br))))
        for ci in range(spec.counties_per_state):
            c_fp = synthetic_fps(ci, "county")
            cx, cy = sx + (ci % cc) * bc, sy + (ci // cc) * br
            records.append(CountyMeta(s_fp, c_fp, f"County {c_fp:03d}",
                                      _rect(gx(cx), gx(cx + bc), gy(cy), gy(cy + br))))
            for bi in range(spec.blocks_per_county):
                b_fp = synthetic_fps(bi, "block")
                kx, ky = cx + bi % bc, cy + bi // bc
                pop = rng.randint(0, 5000)
                under = rng.randint(0, pop // 3)
                over = rng.randint(0, pop // 3)
                age = round(rng.uniform(20.0, 60.0), 1)
                density = 10 ** rng.uniform(t_lo, t_hi) - 1.0
                density = min(max(density, spec.density_range[0]), spec.density_range[1])
                records.append(BlockRecord(
                    b_fp, make_fips(s_fp, c_fp, b_fp), None,
                    _rect(gx(kx), gx(kx + 1), gy(ky), gy(ky + 1)),
                    Demographics(pop, age, under, over, density),
                ))
    return records


def load_bundle_file(path) -> CountryIndex:
    with open(path, "rb") as fh:
        return build_index(parse_bundle(fh.read()))

