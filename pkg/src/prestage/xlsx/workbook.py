"""Per-county workbook layout.

Rows 1-4   DMS / DM -> decimal conversion block (inputs + formulas)
Rows 5-8   radius query: center lon/lat, radius, optional case rate, and the
           in-radius aggregates computed by SUMPRODUCT over the table
Row 9      data table header
Rows 10+   one row per block, ascending GEOID
"""

from __future__ import annotations

from ..census_index import CountyNode
from ..errors import EmptyCounty, InvalidRecord
from ..geometry import EARTH_RADIUS_KM, GeoPoint, RadiusQuery, bbox_center
from .dms import decimal_to_dms
from .formula import evaluate_formulas
from .model import Formula, Number, Text, WorkbookModel, cell_ref, col_letters

DEFAULT_RADIUS_KM = 10.0

HEADER_ROW = 9
FIRST_DATA_ROW = 10

CENTER_LON = (5, 2)
CENTER_LAT = (6, 2)
RADIUS = (7, 2)
CASE_RATE = (8, 2)

TABLE_COLUMNS = (
    "GEOID",
    "Longitude",
    "Latitude",
    "Total Population",
    "Pop Density",
    "Under 15",
    "Over 65",
    "Median Age",
    "Distance (km)",
    "In Radius",
    "Est. Cases",
)
COL = {name: i + 1 for i, name in enumerate(TABLE_COLUMNS)}

# aggregate label/formula cells: (row, label col, value col, summed table column)
AGGREGATES = (
    (5, 4, 5, "Population in Radius", "Total Population"),
    (6, 4, 5, "Under 15 in Radius", "Under 15"),
    (7, 4, 5, "Over 65 in Radius", "Over 65"),
)
BLOCKS_IN_RADIUS = (5, 7, 8)  # row, label col, value col

_WIDTHS = {1: 16.0, 2: 12.0, 3: 12.0, 4: 22.0, 5: 14.0, 6: 16.0, 7: 16.0,
           8: 14.0, 9: 14.0, 10: 10.0, 11: 16.0, 12: 16.0}


def _col(name: str) -> str:
    return col_letters(COL[name])


def _abs(rc: tuple[int, int]) -> str:
    return cell_ref(*rc, absolute=True)


def sign_formula(hemi_cell: str) -> str:
    return f'IF({hemi_cell}="W",-1,IF({hemi_cell}="S",-1,1))'


def dms_formula(row: int) -> str:
    return f"{sign_formula(f'E{row}')}*(B{row}+C{row}/60+D{row}/3600)"


def dm_formula(row: int) -> str:
    return f"{sign_formula(f'K{row}')}*(I{row}+J{row}/60)"


def haversine_formula(row: int) -> str:
    """Single-cell great-circle distance from the query center to this row's point.

    Mirrors the native haversine operation for operation, so both agree bit for bit.
    """
    lon, lat = _abs(CENTER_LON), _abs(CENTER_LAT)
    b, c = f"B{row}", f"C{row}"
    return (
        f"2*{EARTH_RADIUS_KM!r}*ASIN(MIN(1,SQRT("
        f"SIN(RADIANS({c}-{lat})/2)^2"
        f"+COS(RADIANS({lat}))*COS(RADIANS({c}))*SIN(RADIANS({b}-{lon})/2)^2)))"
    )


def _conversion_block(m: WorkbookModel, center: GeoPoint) -> None:
    for col, label in enumerate(("Convert", "Degrees", "Minutes", "Seconds", "Hemisphere",
                                 "Decimal Degrees"), start=1):
        m.set(1, col, Text(label))
    for col, label in enumerate(("Convert (DM)", "Degrees", "Minutes", "Hemisphere",
                                 "Decimal Degrees"), start=8):
        m.set(1, col, Text(label))

    for row, axis, value in ((2, "lon", center.lon), (3, "lat", center.lat)):
        label = "Longitude" if axis == "lon" else "Latitude"
        d = decimal_to_dms(value, axis)
        m.set(row, 1, Text(label))
        m.set(row, 2, Number(float(d.degrees)), user_input=True)
        m.set(row, 3, Number(float(d.minutes)), user_input=True)
        m.set(row, 4, Number(d.seconds), user_input=True)
        m.set(row, 5, Text(d.hemisphere), user_input=True)
        m.set(row, 6, Formula(dms_formula(row)))

        m.set(row, 8, Text(label))
        m.set(row, 9, Number(float(d.degrees)), user_input=True)
        m.set(row, 10, Number(d.minutes + d.seconds / 60), user_input=True)
        m.set(row, 11, Text(d.hemisphere), user_input=True)
        m.set(row, 12, Formula(dm_formula(row)))

    m.set(4, 1, Text("Type DMS or DM coordinates in the cells above; "
                     "decimal degrees appear in columns F and L."))


def build_workbook(
    county: CountyNode,
    case_rate: float = 0.0,
    query: RadiusQuery | None = None,
    sheet_name: str | None = None,
) -> WorkbookModel:
    """Lay out one county's workbook and fill in cached formula values.

    The query defaults to the county's bbox center with a 10 km radius; users
    retype the center/radius cells in the spreadsheet.
    """
    blocks = sorted(county.blocks, key=lambda b: b.full_fips)
    if not blocks:
        raise EmptyCounty(f"county {county.geoid} has no blocks")
    if not 0.0 <= case_rate <= 1.0:
        raise InvalidRecord(f"case_rate must be in [0, 1], got {case_rate}")
    if query is None:
        query = RadiusQuery(bbox_center(county.bbox), DEFAULT_RADIUS_KM)

    m = WorkbookModel(sheet_name=(sheet_name or county.name or county.geoid)[:31])
    _conversion_block(m, query.center)

    m.set(5, 1, Text("Center Longitude"))
    m.set(*CENTER_LON, Number(query.center.lon), user_input=True)
    m.set(6, 1, Text("Center Latitude"))
    m.set(*CENTER_LAT, Number(query.center.lat), user_input=True)
    m.set(7, 1, Text("Radius (km)"))
    m.set(*RADIUS, Number(float(query.radius)), user_input=True)
    with_cases = case_rate > 0
    if with_cases:
        m.set(8, 1, Text("Case Rate"))
        m.set(*CASE_RATE, Number(float(case_rate)), user_input=True)

    first, last = FIRST_DATA_ROW, FIRST_DATA_ROW + len(blocks) - 1
    flags = f"{_col('In Radius')}{first}:{_col('In Radius')}{last}"
    for row, lcol, vcol, label, column in AGGREGATES:
        m.set(row, lcol, Text(label))
        m.set(row, vcol, Formula(f"SUMPRODUCT({_col(column)}{first}:{_col(column)}{last},{flags})"))
    row, lcol, vcol = BLOCKS_IN_RADIUS
    m.set(row, lcol, Text("Blocks in Radius"))
    m.set(row, vcol, Formula(f"SUMPRODUCT({flags})"))

    headers = TABLE_COLUMNS if with_cases else TABLE_COLUMNS[:-1]
    for col, name in enumerate(headers, start=1):
        m.set(HEADER_ROW, col, Text(name))

    for row, b in enumerate(blocks, start=first):
        c = bbox_center(b.bbox)
        d = b.demo
        m.set(row, COL["GEOID"], Text(b.full_fips))
        m.set(row, COL["Longitude"], Number(c.lon))
        m.set(row, COL["Latitude"], Number(c.lat))
        m.set(row, COL["Total Population"], Number(float(d.population)))
        m.set(row, COL["Pop Density"], Number(float(d.density)))
        m.set(row, COL["Under 15"], Number(float(d.under_15)))
        m.set(row, COL["Over 65"], Number(float(d.over_65)))
        m.set(row, COL["Median Age"], Number(float(d.median_age)))
        m.set(row, COL["Distance (km)"], Formula(haversine_formula(row)))
        m.set(row, COL["In Radius"],
              Formula(f"IF({_col('Distance (km)')}{row}<={_abs(RADIUS)},1,0)"))
        if with_cases:
            m.set(row, COL["Est. Cases"],
                  Formula(f"{_col('Total Population')}{row}*{_abs(CASE_RATE)}"))

    m.column_widths.update(_WIDTHS)
    m.validate()
    fill_cached_values(m)
    return m


def fill_cached_values(m: WorkbookModel) -> None:
    """Store evaluator results as each formula's cached value."""
    for key, value in evaluate_formulas(m).items():
        f = m.cells[key]
        m.cells[key] = Formula(f.expr, value)


def aggregate_refs() -> dict[str, str]:
    """Cell references of the radius aggregates, keyed by demographic name."""
    names = ("population", "under_15", "over_65")
    out = {n: cell_ref(r, v) for n, (r, _, v, _, _) in zip(names, AGGREGATES)}
    out["block_count"] = cell_ref(BLOCKS_IN_RADIUS[0], BLOCKS_IN_RADIUS[2])
    return out


def query_overrides(q: RadiusQuery) -> dict[str, float]:
    """Cell edits a user would make to run query ``q`` in the workbook."""
    return {
        cell_ref(*CENTER_LON): q.center.lon,
        cell_ref(*CENTER_LAT): q.center.lat,
        cell_ref(*RADIUS): float(q.radius),
    }
