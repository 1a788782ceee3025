"""Spreadsheet workbooks: model, formula evaluator, layout and xlsx writer."""

from .dms import DmsInput, decimal_to_dms, dm_to_decimal, dms_to_decimal
from .formula import Evaluator, evaluate_formulas
from .model import CellValue, Formula, Number, Text, WorkbookModel
from .workbook import aggregate_refs, build_workbook, query_overrides
from .writer import emit_xlsx
