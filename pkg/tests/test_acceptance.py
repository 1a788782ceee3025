"""Acceptance criteria, one test each.

Each test records a PASS/FAIL line that is printed in the terminal summary
(``pytest tests/test_acceptance.py`` or ``python tests/test_acceptance.py``).
"""

import dataclasses
import hashlib
import random
import time
import xml.etree.ElementTree as ET
import zipfile
from io import BytesIO
from pathlib import Path

import numpy as np
import pytest

from prestage import build_index, lookup_block
from prestage.batch import GenerationConfig, generate_all, layout_path
from prestage.colormap import (
    ColorScheme,
    NormalizationMode,
    density_scale,
    kml_hex_to_rgb,
    map_color,
    normalize,
)
from prestage import _pykernels
from prestage.census_index import BlockRecord
from prestage.geometry import (
    GeoPoint,
    RadiusQuery,
    aggregate_demographics,
    bbox_center,
    blocks_within_radius,
)
from prestage.ingest import SyntheticSpec, generate_synthetic, parse_bundle
from prestage.kml import KML_NS, KmlRenderSpec, emit_kml
from prestage.xlsx import (
    DmsInput,
    Evaluator,
    aggregate_refs,
    build_workbook,
    decimal_to_dms,
    dm_to_decimal,
    dms_to_decimal,
    query_overrides,
)

from conftest import ACCEPTANCE_RESULTS, MIT_FIPS, read_xlsx

KML = {"k": KML_NS}


def record(n: int, ok: bool, detail: str) -> None:
    ACCEPTANCE_RESULTS[n] = (ok, detail)
    assert ok, detail


def _digest(root: Path) -> dict[str, str]:
    return {str(p.relative_to(root)): hashlib.sha256(p.read_bytes()).hexdigest()
            for p in sorted(root.rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def corpus(tmp_path_factory):
    idx = build_index(generate_synthetic(SyntheticSpec(101, 3, 4, 250)))
    root = tmp_path_factory.mktemp("corpus")
    t0 = time.perf_counter()
    r1 = generate_all(idx, GenerationConfig(root / "w1", workers=1))
    r8 = generate_all(idx, GenerationConfig(root / "w8", workers=8))
    return idx, root, r1, r8, time.perf_counter() - t0


def test_criterion_1_corpus_determinism(corpus):
    idx, root, r1, r8, elapsed = corpus
    d1, d8 = _digest(root / "w1"), _digest(root / "w8")
    ok = (d1 == d8 and len(d1) == 12 * 9 and not r1.per_county_failures
          and not r8.per_county_failures)
    record(1, ok, f"{len(d1)} files, trees identical={d1 == d8}, {elapsed:.1f}s for both runs")


@pytest.mark.slow
def test_criterion_2_scaled_throughput(tmp_path):
    idx = build_index(generate_synthetic(SyntheticSpec(202, 4, 25, 500)))
    t0 = time.perf_counter()
    r8 = generate_all(idx, GenerationConfig(tmp_path / "w8", workers=8))
    t8 = time.perf_counter() - t0
    t0 = time.perf_counter()
    r1 = generate_all(idx, GenerationConfig(tmp_path / "w1", workers=1))
    t1 = time.perf_counter() - t0
    complete = r8.files_written == r1.files_written == 900 and not r8.per_county_failures
    ratio = t8 / t1
    record(2, complete and t8 < 120.0 and ratio <= 0.5,
           f"900 files: 8 workers {t8:.1f}s (<120s: {t8 < 120.0}), 1 worker {t1:.1f}s, "
           f"ratio {ratio:.2f} (<=0.5: {ratio <= 0.5})")


def test_criterion_3_published_block_values(mit_bundle_bytes):
    b = lookup_block(build_index(parse_bundle(mit_bundle_bytes)), MIT_FIPS)
    d = b.demo
    counts = (d.population, d.under_15, d.over_65) == (1116, 120, 45)
    floats = [(d.median_age, 27.1), (d.density, 13950.0), (b.bbox.x_min, -71.1021),
              (b.bbox.x_max, -71.0908), (b.bbox.y_min, 42.3604), (b.bbox.y_max, 42.3660)]
    err = max(abs(a - e) for a, e in floats)
    record(3, counts and err <= 1e-9, f"counts exact={counts}, max float error {err:.1e}")


def test_criterion_4_radius_oracle_equivalence():
    idx = build_index(generate_synthetic(SyntheticSpec(404, 2, 5, 60)))
    counties = [c for _, c in idx.iter_counties()]
    workbooks = {c.geoid: build_workbook(c) for c in counties}
    refs = aggregate_refs()
    rng = random.Random(404)
    set_mismatch = agg_err = 0
    worst = 0.0
    for _ in range(200):
        county = rng.choice(counties)
        bb = county.bbox
        q = RadiusQuery(GeoPoint(rng.uniform(bb.x_min - 0.02, bb.x_max + 0.02),
                                 rng.uniform(bb.y_min - 0.02, bb.y_max + 0.02)),
                        rng.uniform(0.0, 12.0))
        got = blocks_within_radius(county, q)
        brute = sorted((b for b in county.blocks
                        if _pykernels.haversine(q.center.lon, q.center.lat,
                                                *_center(b)) <= q.radius),
                       key=lambda b: b.full_fips)
        set_mismatch += got != brute
        agg = aggregate_demographics(brute)
        ev = Evaluator(workbooks[county.geoid], query_overrides(q))
        for name, want in (("population", agg.population), ("under_15", agg.under_15),
                           ("over_65", agg.over_65)):
            diff = abs(ev[refs[name]] - want)
            worst = max(worst, diff)
            agg_err += diff > 1e-9
    record(4, set_mismatch == 0 and agg_err == 0,
           f"200 queries: set mismatches {set_mismatch}, aggregate max error {worst:.1e}")


def _center(b):
    c = bbox_center(b.bbox)
    return c.lon, c.lat


def test_criterion_5_coordinate_conversion(small_index):
    rng = random.Random(505)
    rt = 0.0
    for _ in range(1000):
        axis = rng.choice(("lat", "lon"))
        lim = 90.0 if axis == "lat" else 180.0
        v = rng.uniform(-lim, lim)
        rt = max(rt, abs(dms_to_decimal(decimal_to_dms(v, axis)) - v))
    model = build_workbook(small_index.states[0].counties[0])
    fe = 0.0
    for i in range(100):
        row = 2 + i % 2
        hemi = rng.choice("NSEW")
        deg = rng.randint(0, 89)
        if i < 50:
            d = DmsInput(deg, rng.randint(0, 59), rng.uniform(0, 59.999), hemi)
            ev = Evaluator(model, {f"B{row}": d.degrees, f"C{row}": d.minutes,
                                   f"D{row}": d.seconds, f"E{row}": hemi})
            fe = max(fe, abs(ev[f"F{row}"] - dms_to_decimal(d)))
        else:
            m = rng.uniform(0, 59.999)
            ev = Evaluator(model, {f"I{row}": deg, f"J{row}": m, f"K{row}": hemi})
            fe = max(fe, abs(ev[f"L{row}"] - dm_to_decimal(deg, m, hemi)))
    record(5, rt <= 1e-9 and fe <= 1e-9,
           f"round-trip max error {rt:.1e}, workbook formula max error {fe:.1e}")


def test_criterion_6_relative_absolute_contrast():
    recs = generate_synthetic(SyntheticSpec(606, 3, 4, 100))
    target = (1, 1)  # first synthetic state and county
    rng = random.Random(606)
    low = []
    for r in recs:
        if isinstance(r, BlockRecord) and (r.state_fp, r.county_fp) == target:
            r = dataclasses.replace(r, demo=dataclasses.replace(r.demo, density=rng.uniform(5, 10)))
        low.append(r)
    idx = build_index(low)
    county = idx.county(*target)
    national = np.array([b.demo.density for b in idx.iter_blocks()])
    p20 = float(np.percentile(national, 20))
    cmax = max(b.demo.density for b in county.blocks)

    def max_u(mode):
        s = density_scale(idx, county, mode)
        return max(normalize(b.demo.density, s) for b in county.blocks)

    def warm_fills(scheme, mode):
        data = emit_kml(KmlRenderSpec(county, scheme, density_scale(idx, county, mode)))
        root = ET.fromstring(data)
        fills = [s.find("k:PolyStyle/k:color", KML).text
                 for s in root.findall("k:Document/k:Style", KML)]
        return sum(kml_hex_to_rgb(f)[0].warmth > 0 for f in fills)

    ua, ur = max_u(NormalizationMode.ABSOLUTE), max_u(NormalizationMode.RELATIVE)
    # warmth of green-red is r itself, positive for any nonzero position, so
    # the contrast is checked on the schemes that pass through neutral at 0.5
    schemes = (ColorScheme.JET, ColorScheme.REDBLUE)
    rel_warm = {s.value: warm_fills(s, NormalizationMode.RELATIVE) for s in schemes}
    abs_warm = {s.value: warm_fills(s, NormalizationMode.ABSOLUTE) for s in schemes}
    ok = (cmax < p20 and ua < 0.5 and ur == 1.0
          and all(v > 0 for v in rel_warm.values()) and not any(abs_warm.values()))
    record(6, ok, f"county max {cmax:.1f} < p20 {p20:.1f}; max u absolute {ua:.3f}, "
                  f"relative {ur}; warm fills relative {rel_warm}, absolute {abs_warm}")


def test_criterion_7_format_validity(corpus):
    idx, root, *_ = corpus
    tree = root / "w1"
    by_path = {}
    for st, co in idx.iter_counties():
        by_path[layout_path(st, co, "xlsx")] = co
        for scheme in ColorScheme:
            for mode in NormalizationMode:
                by_path[layout_path(st, co, "kml", scheme, mode)] = co
    kml_bad = xlsx_bad = 0
    kml_files = sorted(tree.rglob("*.kml"))
    xlsx_files = sorted(tree.rglob("*.xlsx"))
    for p in kml_files:
        county = by_path[p.relative_to(tree).as_posix()]
        doc = ET.fromstring(p.read_bytes())
        kml_bad += len(doc.findall("k:Document/k:Placemark", KML)) != len(county.blocks)
    for p in xlsx_files:
        county = by_path[p.relative_to(tree).as_posix()]
        data = p.read_bytes()
        if zipfile.ZipFile(BytesIO(data)).testzip() is not None:
            xlsx_bad += 1
            continue
        xlsx_bad += read_xlsx(data) != build_workbook(county)
    ok = kml_bad == 0 and xlsx_bad == 0 and len(kml_files) == 96 and len(xlsx_files) == 12
    record(7, ok, f"{len(kml_files)} KML ({kml_bad} bad), {len(xlsx_files)} workbooks "
                  f"({xlsx_bad} bad); viewer smoke check is manual and was not run here")


def test_criterion_8_colormap_checks():
    lo, hi, mid = (map_color(ColorScheme.JET, u) for u in (0.0, 1.0, 0.5))
    err = max(abs(a - b) for a, b in zip((lo.r, lo.g, lo.b, hi.r, hi.g, hi.b, mid.r, mid.g, mid.b),
                                         (0, 0, 0.5, 0.5, 0, 0, 0.5, 1, 0.5)))
    idx = build_index(generate_synthetic(SyntheticSpec(808, 1, 1, 1000)))
    county = idx.states[0].counties[0]
    blocks = sorted(county.blocks, key=lambda b: b.demo.density)
    scale = density_scale(idx, county, NormalizationMode.RELATIVE)
    violations = {}
    for scheme in ColorScheme:
        w = [map_color(scheme, normalize(b.demo.density, scale)).warmth for b in blocks]
        violations[scheme.value] = sum(b < a - 1e-12 for a, b in zip(w, w[1:]))
    ok = err <= 1e-12 and not any(violations.values())
    record(8, ok, f"jet anchors max error {err:.1e}; warmth order violations over "
                  f"1000 blocks {violations}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
