"""Per-county KML choropleth documents."""

from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from . import kernels
from .census_index import BlockRecord, CountyNode
from .colormap import DULL_BLEND, ColorScheme, DensityScale, block_fill_colors
from .errors import EmptyCounty, GeometryError, InvalidRecord

KML_NS = "http://www.opengis.net/kml/2.2"
DEFAULT_FILL_ALPHA = 0x99
DEFAULT_LINE_ALPHA = 0xFF
RING_CLOSE_TOL = 1e-9

POPUP_ROWS = (
    "GEOID",
    "Total Population",
    "Population Density (per sq mi)",
    "Population Over 65",
    "Population Under 15",
    "Median Age",
)


@dataclass(frozen=True)
class KmlRenderSpec:
    county: CountyNode
    scheme: ColorScheme
    scale: DensityScale
    fill_alpha: int = DEFAULT_FILL_ALPHA
    line_alpha: int = DEFAULT_LINE_ALPHA
    document_name: str = "census blocks"
    dull_blend: float = DULL_BLEND

    def __post_init__(self) -> None:
        for a in (self.fill_alpha, self.line_alpha):
            if not 0 <= a <= 255:
                raise InvalidRecord(f"alpha must be a byte, got {a}")
        if not self.document_name:
            raise InvalidRecord("document_name must be non-empty")


def popup_values(b: BlockRecord) -> tuple[str, ...]:
    d = b.demo
    return (
        b.full_fips,
        str(d.population),
        "%.0f" % d.density,
        str(d.over_65),
        str(d.under_15),
        "%.1f" % d.median_age,
    )


def popup_html(b: BlockRecord) -> str:
    rows = "".join(
        f"<tr><td>{label}</td><td>{value}</td></tr>"
        for label, value in zip(POPUP_ROWS, popup_values(b))
    )
    return f"<table>{rows}</table>"


def _ring_coordinates(xs: np.ndarray, ys: np.ndarray, geoid: str) -> str:
    if xs.size < 4:
        raise GeometryError(f"block {geoid}: ring with {xs.size} vertices (need >= 4)")
    if not (np.isfinite(xs).all() and np.isfinite(ys).all()):
        raise GeometryError(f"block {geoid}: non-finite vertex")
    if abs(xs[0] - xs[-1]) > RING_CLOSE_TOL or abs(ys[0] - ys[-1]) > RING_CLOSE_TOL:
        raise GeometryError(f"block {geoid}: ring is not closed")
    if xs[-1] != xs[0] or ys[-1] != ys[0]:
        xs = np.append(xs[:-1], xs[0])
        ys = np.append(ys[:-1], ys[0])
    return kernels.format_ring(xs, ys)


def _polygon(coords: str) -> str:
    return (
        "<Polygon><outerBoundaryIs><LinearRing><coordinates>"
        f"{coords}"
        "</coordinates></LinearRing></outerBoundaryIs></Polygon>"
    )


def _geometry_xml(b: BlockRecord) -> str:
    rings = b.geometry.rings()
    if not rings:
        raise GeometryError(f"block {b.full_fips}: no geometry")
    polys = [_polygon(_ring_coordinates(x, y, b.full_fips)) for x, y in rings]
    if len(polys) == 1:
        return polys[0]
    return "<MultiGeometry>" + "".join(polys) + "</MultiGeometry>"


def emit_kml(spec: KmlRenderSpec) -> bytes:
    """Render ``spec.county`` to a UTF-8 KML document (byte-deterministic)."""
    blocks = sorted(spec.county.blocks, key=lambda b: b.full_fips)
    if not blocks:
        raise EmptyCounty(f"county {spec.county.geoid} has no blocks")

    densities = np.fromiter((b.demo.density for b in blocks), np.float64, len(blocks))
    fills = block_fill_colors(densities, spec.scheme, spec.scale, spec.fill_alpha, spec.dull_blend)
    line = "%02xffffff" % spec.line_alpha

    placemarks = []
    for b, fill in zip(blocks, fills):
        placemarks.append(
            f"<Placemark><name>{b.full_fips}</name>"
            f"<description><![CDATA[{popup_html(b)}]]></description>"
            f"<styleUrl>#c{fill}</styleUrl>"
            f"{_geometry_xml(b)}</Placemark>\n"
        )

    styles = [
        f'<Style id="c{fill}"><LineStyle><color>{line}</color></LineStyle>'
        f"<PolyStyle><color>{fill}</color></PolyStyle></Style>\n"
        for fill in sorted(set(fills))
    ]
    doc = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<kml xmlns="{KML_NS}">\n<Document>\n'
        f"<name>{escape(spec.document_name)}</name>\n"
        + "".join(styles)
        + "".join(placemarks)
        + "</Document>\n</kml>\n"
    )
    return doc.encode("utf-8")


def document_name(state_name: str, county_name: str, scheme: ColorScheme, mode) -> str:
    return f"{county_name}, {state_name} ({scheme.value}, {mode.value})"

