"""Minimal Office Open XML (xlsx) package writer.

Five parts, inline strings, formulas with cached values, fixed entry order
and timestamps: the same model always yields the same bytes.
"""

from __future__ import annotations

import io
import math
import zipfile
from xml.sax.saxutils import escape, quoteattr

from ..errors import InvalidRecord
from .model import Formula, Number, Text, WorkbookModel, cell_ref

NS_MAIN = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
NS_REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
NS_PKG_REL = "http://schemas.openxmlformats.org/package/2006/relationships"
NS_CT = "http://schemas.openxmlformats.org/package/2006/content-types"

ZIP_EPOCH = (1980, 1, 1, 0, 0, 0)
DEFLATE_LEVEL = 6

_DECL = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'

CONTENT_TYPES = (
    _DECL + f'<Types xmlns="{NS_CT}">'
    '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
    '<Default Extension="xml" ContentType="application/xml"/>'
    '<Override PartName="/xl/workbook.xml" '
    'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>'
    '<Override PartName="/xl/worksheets/sheet1.xml" '
    'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>'
    "</Types>"
)

PACKAGE_RELS = (
    _DECL + f'<Relationships xmlns="{NS_PKG_REL}">'
    f'<Relationship Id="rId1" Type="{NS_REL}/officeDocument" Target="xl/workbook.xml"/>'
    "</Relationships>"
)

WORKBOOK_RELS = (
    _DECL + f'<Relationships xmlns="{NS_PKG_REL}">'
    f'<Relationship Id="rId1" Type="{NS_REL}/worksheet" Target="worksheets/sheet1.xml"/>'
    "</Relationships>"
)

_BAD_SHEET_CHARS = set('[]:*?/\\')


def format_number(v: float) -> str:
    """Shortest text that parses back to exactly ``v``."""
    if not math.isfinite(v):
        raise InvalidRecord(f"cannot store non-finite number {v!r}")
    if v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return repr(float(v))


def _text(s: str) -> str:
    space = ' xml:space="preserve"' if s != s.strip() or "\n" in s else ""
    return f"<t{space}>{escape(s)}</t>"


def _cell_xml(ref: str, v) -> str:
    if isinstance(v, Number):
        return f'<c r="{ref}"><v>{format_number(float(v.value))}</v></c>'
    if isinstance(v, Text):
        return f'<c r="{ref}" t="inlineStr"><is>{_text(v.value)}</is></c>'
    if isinstance(v, Formula):
        f = f"<f>{escape(v.expr)}</f>"
        cached = v.cached
        if cached is None:
            return f'<c r="{ref}">{f}</c>'
        if isinstance(cached, bool):
            return f'<c r="{ref}" t="b">{f}<v>{int(cached)}</v></c>'
        if isinstance(cached, str):
            return f'<c r="{ref}" t="str">{f}<v>{escape(cached)}</v></c>'
        return f'<c r="{ref}">{f}<v>{format_number(float(cached))}</v></c>'
    raise InvalidRecord(f"unsupported cell value at {ref}: {v!r}")


def sheet_xml(model: WorkbookModel) -> str:
    parts = [_DECL, f'<worksheet xmlns="{NS_MAIN}">']
    if model.column_widths:
        parts.append("<cols>")
        for col in sorted(model.column_widths):
            w = format_number(float(model.column_widths[col]))
            parts.append(f'<col min="{col}" max="{col}" width="{w}" customWidth="1"/>')
        parts.append("</cols>")
    by_row: dict[int, list[tuple[int, object]]] = {}
    for (r, c), v in model.cells.items():
        by_row.setdefault(r, []).append((c, v))
    if not by_row:
        parts.append("<sheetData/>")
    else:
        parts.append("<sheetData>")
        for r in sorted(by_row):
            parts.append(f'<row r="{r}">')
            parts.extend(_cell_xml(cell_ref(r, c), v) for c, v in sorted(by_row[r], key=lambda t: t[0]))
            parts.append("</row>")
        parts.append("</sheetData>")
    parts.append("</worksheet>")
    return "".join(parts)


def workbook_xml(sheet_name: str) -> str:
    if not sheet_name or len(sheet_name) > 31 or _BAD_SHEET_CHARS & set(sheet_name):
        raise InvalidRecord(f"invalid worksheet name {sheet_name!r}")
    return (
        _DECL + f'<workbook xmlns="{NS_MAIN}" xmlns:r="{NS_REL}">'
        f'<sheets><sheet name={quoteattr(sheet_name)} sheetId="1" r:id="rId1"/></sheets>'
        '<calcPr fullCalcOnLoad="1"/>'
        "</workbook>"
    )


def safe_sheet_name(name: str) -> str:
    cleaned = "".join("_" if ch in _BAD_SHEET_CHARS else ch for ch in name).strip("'")
    return (cleaned or "Sheet1")[:31]


def emit_xlsx(model: WorkbookModel) -> bytes:
    entries = (
        ("[Content_Types].xml", CONTENT_TYPES),
        ("_rels/.rels", PACKAGE_RELS),
        ("xl/workbook.xml", workbook_xml(safe_sheet_name(model.sheet_name))),
        ("xl/_rels/workbook.xml.rels", WORKBOOK_RELS),
        ("xl/worksheets/sheet1.xml", sheet_xml(model)),
    )
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        for name, text in entries:
            info = zipfile.ZipInfo(name, date_time=ZIP_EPOCH)
            info.compress_type = zipfile.ZIP_DEFLATED
            info.create_system = 0
            info.external_attr = 0o644 << 16
            zf.writestr(info, text.encode("utf-8"), compresslevel=DEFLATE_LEVEL)
    return buf.getvalue()
