import json

import pytest

from prestage import build_index, entity_counts, lookup_block
from prestage.census_index import BlockRecord, CountyMeta, StateMeta
from prestage.errors import (
    BundleSyntaxError,
    CapacityError,
    DanglingReference,
    EmptyInput,
    InvalidRecord,
    SchemaError,
    VersionError,
)
from prestage.ingest import SyntheticSpec, generate_synthetic, parse_bundle, serialize_bundle

from conftest import MIT_FIPS, mit_bundle_dict, synthetic_index


def test_mit_bundle_parses_to_three_records(mit_bundle_bytes):
    recs = parse_bundle(mit_bundle_bytes)
    assert [type(r) for r in recs] == [StateMeta, CountyMeta, BlockRecord]
    b = recs[2]
    assert b.full_fips == MIT_FIPS
    assert (b.demo.population, b.demo.median_age, b.demo.under_15, b.demo.over_65,
            b.demo.density) == (1116, 27.1, 120, 45, 13950.0)


def test_unknown_fields_and_order_ignored():
    doc = mit_bundle_dict()
    doc["producer"] = "x"
    for ent in doc["entities"]:
        ent["extra"] = [1, 2]
    doc["entities"].reverse()
    idx = build_index(parse_bundle(json.dumps(doc)))
    assert lookup_block(idx, MIT_FIPS).demo.population == 1116


def test_empty_entities_surface_empty_input():
    recs = parse_bundle(b'{"format_version": 1, "entities": []}')
    with pytest.raises(EmptyInput):
        build_index(recs)


def test_syntax_error_reports_byte_offset():
    data = '{"format_version": 1, "é": ,}'.encode()
    with pytest.raises(BundleSyntaxError) as ei:
        parse_bundle(data)
    # the comma after the colon; "é" is two bytes in UTF-8
    assert ei.value.offset == data.index(b" ,") + 1
    with pytest.raises(BundleSyntaxError):
        parse_bundle(b"\xff\xfe")


def test_version_error():
    with pytest.raises(VersionError):
        parse_bundle(b'{"format_version": 2, "entities": []}')
    with pytest.raises(VersionError):
        parse_bundle(b'{"entities": []}')


def test_schema_error_names_entity():
    doc = mit_bundle_dict()
    del doc["entities"][2]["demographics"]["population"]
    with pytest.raises(SchemaError) as ei:
        parse_bundle(json.dumps(doc))
    assert ei.value.kind == "block" and ei.value.fips == MIT_FIPS
    doc = mit_bundle_dict()
    del doc["entities"][1]["county_fp"]
    with pytest.raises(SchemaError) as ei:
        parse_bundle(json.dumps(doc))
    assert ei.value.kind == "county"


def test_dangling_reference():
    doc = mit_bundle_dict()
    del doc["entities"][1]
    with pytest.raises(DanglingReference):
        parse_bundle(json.dumps(doc))


def test_serialize_one_block(mit_index):
    doc = json.loads(serialize_bundle(mit_index))
    assert [e["kind"] for e in doc["entities"]] == ["state", "county", "block"]
    assert serialize_bundle(mit_index) == serialize_bundle(mit_index)


def test_serialize_sorted_keys(small_index):
    text = serialize_bundle(small_index).decode()
    doc = json.loads(text)
    assert json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n" == text


@pytest.mark.parametrize("seed", range(50))
def test_round_trip_synthetic(seed):
    import random

    rng = random.Random(seed)
    idx = synthetic_index(seed, rng.randint(1, 3), rng.randint(1, 3), rng.randint(1, 12))
    data = serialize_bundle(idx)
    again = build_index(parse_bundle(data))
    assert again == idx
    assert serialize_bundle(again) == data
    # parse(serialize(parse(f))) reproduces the record list
    assert parse_bundle(serialize_bundle(build_index(parse_bundle(data)))) == parse_bundle(data)


def test_synthetic_record_count_and_determinism():
    spec = SyntheticSpec(7, 3, 2, 10)
    a = generate_synthetic(spec)
    assert len(a) == 3 + 6 + 60
    assert a == generate_synthetic(spec)
    assert a != generate_synthetic(SyntheticSpec(8, 3, 2, 10))


@pytest.mark.parametrize("seed", range(100))
def test_synthetic_passes_build(seed):
    import random

    rng = random.Random(1000 + seed)
    lo = rng.uniform(0, 100)
    spec = SyntheticSpec(seed, rng.randint(1, 4), rng.randint(1, 4), rng.randint(1, 30),
                         (lo, lo + rng.uniform(0, 1e5)))
    recs = generate_synthetic(spec)
    idx = build_index(recs)
    assert entity_counts(idx) == (spec.num_states, spec.num_states * spec.counties_per_state,
                                  spec.num_states * spec.counties_per_state * spec.blocks_per_county)
    for b in idx.iter_blocks():
        d = b.demo
        assert 0 <= d.population <= 5000
        assert d.under_15 + d.over_65 <= d.population
        assert 20 <= d.median_age <= 60
        assert spec.density_range[0] <= d.density <= spec.density_range[1]


def test_synthetic_blocks_do_not_overlap():
    idx = synthetic_index(5, 1, 1, 30)
    boxes = [b.bbox for b in idx.iter_blocks()]
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            overlap_x = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
            overlap_y = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
            assert overlap_x <= 1e-12 or overlap_y <= 1e-12


def test_capacity_error():
    with pytest.raises(CapacityError):
        generate_synthetic(SyntheticSpec(1, 50, 50, 10000, block_size_deg=0.05))


def test_invalid_spec():
    with pytest.raises(InvalidRecord):
        SyntheticSpec(1, 0, 1, 1)
    with pytest.raises(InvalidRecord):
        SyntheticSpec(1, 1, 1, 1, density_range=(10, 5))
