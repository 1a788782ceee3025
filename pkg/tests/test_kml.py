import dataclasses
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from prestage.census_index import PolygonGeometry
from prestage.colormap import (
    ColorScheme,
    NormalizationMode,
    density_scale,
    map_color,
    normalize,
    rgb_to_kml_hex,
)
from prestage.errors import EmptyCounty, GeometryError
from prestage.kml import KML_NS, POPUP_ROWS, KmlRenderSpec, emit_kml

from conftest import MIT_BBOX, MIT_FIPS, synthetic_index

NS = {"k": KML_NS}


def _render(index, county, scheme=ColorScheme.JET, mode=NormalizationMode.RELATIVE, **kw):
    return emit_kml(KmlRenderSpec(county, scheme, density_scale(index, county, mode), **kw))


def _popup(pm):
    html = pm.find("k:description", NS).text
    cells = re.findall(r"<td>(.*?)</td>", html)
    return dict(zip(cells[::2], cells[1::2]))


def test_mit_placemark(mit_index):
    county = mit_index.county(25, 17)
    root = ET.fromstring(_render(mit_index, county))
    pms = root.findall("k:Document/k:Placemark", NS)
    assert len(pms) == 1
    pm = pms[0]
    assert pm.find("k:name", NS).text == MIT_FIPS
    popup = _popup(pm)
    assert list(popup) == list(POPUP_ROWS)
    assert popup == {
        "GEOID": MIT_FIPS,
        "Total Population": "1116",
        "Population Density (per sq mi)": "13950",
        "Population Over 65": "45",
        "Population Under 15": "120",
        "Median Age": "27.1",
    }
    coords = pm.find("k:Polygon/k:outerBoundaryIs/k:LinearRing/k:coordinates", NS).text.split()
    pts = [tuple(float(v) for v in c.split(",")) for c in coords]
    x0, x1, y0, y1 = MIT_BBOX
    assert pts == [(x0, y0, 0), (x1, y0, 0), (x1, y1, 0), (x0, y1, 0), (x0, y0, 0)]


def test_placemarks_colors_and_coordinates():
    idx = synthetic_index(4, 2, 2, 60)
    for _, county in idx.iter_counties():
        for scheme in ColorScheme:
            for mode in NormalizationMode:
                data = _render(idx, county, scheme, mode)
                root = ET.fromstring(data)
                styles = {s.get("id"): s.find("k:PolyStyle/k:color", NS).text
                          for s in root.findall("k:Document/k:Style", NS)}
                pms = root.findall("k:Document/k:Placemark", NS)
                assert len(pms) == len(county.blocks)
                scale = density_scale(idx, county, mode)
                for pm, b in zip(pms, sorted(county.blocks, key=lambda b: b.full_fips)):
                    assert pm.find("k:name", NS).text == b.full_fips
                    expected = rgb_to_kml_hex(map_color(scheme, normalize(b.demo.density, scale)), 0x99)
                    assert styles[pm.find("k:styleUrl", NS).text[1:]] == expected
                    text = pm.find(".//k:coordinates", NS).text
                    pts = np.array([[float(v) for v in c.split(",")[:2]] for c in text.split()])
                    (xs, ys), = b.geometry.rings()
                    assert np.abs(pts[:, 0] - xs).max() <= 1e-7
                    assert np.abs(pts[:, 1] - ys).max() <= 1e-7


def test_deterministic_and_alpha(small_index):
    county = small_index.states[1].counties[1]
    a = _render(small_index, county, fill_alpha=0x40, line_alpha=0x80)
    assert a == _render(small_index, county, fill_alpha=0x40, line_alpha=0x80)
    root = ET.fromstring(a)
    for s in root.findall("k:Document/k:Style", NS):
        assert s.find("k:PolyStyle/k:color", NS).text.startswith("40")
        assert s.find("k:LineStyle/k:color", NS).text == "80ffffff"


def _with_block_geometry(county, rings):
    b = dataclasses.replace(county.blocks[0], geometry=PolygonGeometry.from_rings(rings))
    return dataclasses.replace(county, blocks=(b,) + county.blocks[1:])


@pytest.mark.parametrize("rings", [
    [[(0, 0), (1, 0), (0, 0)]],
    [[(0, 0), (1, 0), (1, 1), (0, 1)]],
    [[(0, 0), (1, 0), (1, float("inf")), (0, 0)]],
    [],
])
def test_invalid_geometry(small_index, rings):
    county = _with_block_geometry(small_index.states[0].counties[0], rings)
    with pytest.raises(GeometryError):
        _render(small_index, county)


def test_nearly_closed_ring_is_closed_exactly(small_index):
    county = _with_block_geometry(small_index.states[0].counties[0],
                                  [[(0, 0), (1, 0), (1, 1), (1e-10, 0)]])
    root = ET.fromstring(_render(small_index, county))
    text = root.find("k:Document/k:Placemark//k:coordinates", NS).text.split()
    assert text[0] == text[-1]


def test_multi_ring_block(small_index):
    county = _with_block_geometry(small_index.states[0].counties[0],
                                  [[(0, 0), (1, 0), (1, 1), (0, 0)], [(2, 2), (3, 2), (3, 3), (2, 2)]])
    root = ET.fromstring(_render(small_index, county))
    pm = root.find("k:Document/k:Placemark", NS)
    assert len(pm.findall("k:MultiGeometry/k:Polygon", NS)) == 2


def test_empty_county(small_index):
    county = dataclasses.replace(small_index.states[0].counties[0], blocks=())
    with pytest.raises(EmptyCounty):
        emit_kml(KmlRenderSpec(county, ColorScheme.JET,
                               density_scale(small_index, small_index.states[0].counties[0],
                                             NormalizationMode.ABSOLUTE)))
