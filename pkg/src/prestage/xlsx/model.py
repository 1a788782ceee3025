"""In-memory worksheet model: a sparse grid of numbers, text and formulas."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Union

from ..errors import InvalidRecord

_REF_RE = re.compile(r"^\$?([A-Z]{1,3})\$?([0-9]+)$")


@dataclass(frozen=True)
class Number:
    value: float


@dataclass(frozen=True)
class Text:
    value: str


@dataclass(frozen=True)
class Formula:
    expr: str  # without the leading "="
    cached: float | str | None = None


CellValue = Union[Number, Text, Formula]


def col_letters(col: int) -> str:
    if col < 1:
        raise ValueError(f"column must be >= 1, got {col}")
    out = ""
    while col:
        col, rem = divmod(col - 1, 26)
        out = chr(ord("A") + rem) + out
    return out


def col_index(letters: str) -> int:
    n = 0
    for ch in letters:
        n = n * 26 + (ord(ch) - ord("A") + 1)
    return n


def cell_ref(row: int, col: int, absolute: bool = False) -> str:
    if absolute:
        return f"${col_letters(col)}${row}"
    return f"{col_letters(col)}{row}"


def parse_ref(ref: str) -> tuple[int, int]:
    """``"$B$7"`` -> ``(7, 2)`` as (row, column)."""
    m = _REF_RE.match(ref.upper())
    if not m:
        raise ValueError(f"not a cell reference: {ref!r}")
    return int(m.group(2)), col_index(m.group(1))


@dataclass
class WorkbookModel:
    sheet_name: str = "Sheet1"
    cells: dict[tuple[int, int], CellValue] = field(default_factory=dict)
    column_widths: dict[int, float] = field(default_factory=dict)
    # cells a user is expected to fill in; formulas may reference them while empty
    input_cells: set[tuple[int, int]] = field(default_factory=set, compare=False)

    def set(self, row: int, col: int, value: CellValue, *, user_input: bool = False) -> None:
        if row < 1 or col < 1:
            raise InvalidRecord(f"cell ({row}, {col}) outside the sheet")
        if (row, col) in self.cells:
            raise InvalidRecord(f"cell {cell_ref(row, col)} defined twice")
        self.cells[(row, col)] = value
        if user_input:
            self.input_cells.add((row, col))

    def mark_input(self, row: int, col: int) -> None:
        self.input_cells.add((row, col))

    def get(self, row: int, col: int) -> CellValue | None:
        return self.cells.get((row, col))

    def __getitem__(self, ref: str) -> CellValue | None:
        return self.cells.get(parse_ref(ref))

    def rows(self) -> list[int]:
        return sorted({r for r, _ in self.cells})

    def validate(self) -> None:
        """Every formula reference must hit a defined cell or a user-input cell."""
        from .formula import referenced_cells

        for (r, c), v in self.cells.items():
            if isinstance(v, Formula):
                for ref in referenced_cells(v.expr):
                    if ref not in self.cells and ref not in self.input_cells:
                        raise InvalidRecord(
                            f"{cell_ref(r, c)} references undefined cell {cell_ref(*ref)}"
                        )
