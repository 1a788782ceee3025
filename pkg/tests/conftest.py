from __future__ import annotations

import json
import zipfile
import xml.etree.ElementTree as ET
from io import BytesIO

import pytest

from prestage import build_index
from prestage.ingest import SyntheticSpec, generate_synthetic, parse_bundle
from prestage.xlsx.model import Formula, Number, Text, WorkbookModel

MA_BBOX = [-73.5081, -69.9284, 41.2380, 42.8866]
MIDDLESEX_BBOX = [-71.8988, -71.0204, 42.1568, 42.7366]
MIT_BBOX = [-71.1021, -71.0908, 42.3604, 42.3660]
MIT_FIPS = "250173531012"


def rect_ring(bb):
    x0, x1, y0, y1 = bb
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]]


def mit_bundle_dict() -> dict:
    return {
        "format_version": 1,
        "entities": [
            {"kind": "state", "state_fp": 25, "name": "Massachusetts",
             "bbox": MA_BBOX, "rings": [rect_ring(MA_BBOX)]},
            {"kind": "county", "state_fp": 25, "county_fp": 17, "name": "Middlesex",
             "bbox": MIDDLESEX_BBOX, "rings": [rect_ring(MIDDLESEX_BBOX)]},
            {"kind": "block", "state_fp": 25, "county_fp": 17, "block_fp": 3531012,
             "bbox": MIT_BBOX, "rings": [rect_ring(MIT_BBOX)],
             "demographics": {"population": 1116, "median_age": 27.1, "under_15": 120,
                              "over_65": 45, "density": 13950}},
        ],
    }


@pytest.fixture
def mit_bundle_bytes() -> bytes:
    return json.dumps(mit_bundle_dict()).encode("utf-8")


@pytest.fixture
def mit_index(mit_bundle_bytes):
    return build_index(parse_bundle(mit_bundle_bytes))


def synthetic_index(seed=7, states=3, counties=2, blocks=10, **kw):
    return build_index(generate_synthetic(SyntheticSpec(seed, states, counties, blocks, **kw)))


@pytest.fixture
def small_index():
    return synthetic_index()


# -- independent xlsx reader (zipfile + ElementTree, shares nothing with the writer) --

_NS = {"m": "http://schemas.openxmlformats.org/spreadsheetml/2006/main"}


def _col_to_int(letters: str) -> int:
    n = 0
    for ch in letters:
        n = n * 26 + ord(ch) - 64
    return n


def _split_ref(ref: str) -> tuple[int, int]:
    i = next(k for k, ch in enumerate(ref) if ch.isdigit())
    return int(ref[i:]), _col_to_int(ref[:i])


def read_xlsx(data: bytes) -> WorkbookModel:
    zf = zipfile.ZipFile(BytesIO(data))
    wb = ET.fromstring(zf.read("xl/workbook.xml"))
    sheet_name = wb.find("m:sheets/m:sheet", _NS).get("name")
    ws = ET.fromstring(zf.read("xl/worksheets/sheet1.xml"))
    model = WorkbookModel(sheet_name=sheet_name)
    for col in ws.findall("m:cols/m:col", _NS):
        model.column_widths[int(col.get("min"))] = float(col.get("width"))
    for c in ws.iter(f"{{{_NS['m']}}}c"):
        row, colno = _split_ref(c.get("r"))
        t = c.get("t")
        f = c.find("m:f", _NS)
        v = c.find("m:v", _NS)
        if f is not None:
            cached = None
            if v is not None:
                if t == "str":
                    cached = v.text or ""
                elif t == "b":
                    cached = v.text == "1"
                else:
                    cached = float(v.text)
            model.cells[(row, colno)] = Formula(f.text, cached)
        elif t == "inlineStr":
            model.cells[(row, colno)] = Text("".join(c.find("m:is", _NS).itertext()))
        else:
            model.cells[(row, colno)] = Number(float(v.text))
    return model


# -- acceptance report: one line per criterion, printed after the run --

ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
