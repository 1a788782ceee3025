"""A small spreadsheet-formula evaluator.

Covers the function set the generated workbooks use: arithmetic, comparisons,
SIN, COS, ASIN, SQRT, RADIANS, PI, IF, ABS, MIN, MAX, SUMPRODUCT and
absolute/relative cell references. Operator precedence follows Excel
(unary minus binds tighter than ``^``; ``^`` is left-associative).
"""

from __future__ import annotations

import math
import re
from functools import lru_cache
from typing import Any, Callable, Mapping

from ..errors import FormulaError
from .model import Formula, Number, Text, WorkbookModel, parse_ref

Value = Any  # float | str | bool | None (blank)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<str>"(?:[^"]|"")*")
  | (?P<func>[A-Za-z][A-Za-z0-9.]*(?=\())
  | (?P<range>\$?[A-Za-z]{1,3}\$?[0-9]+:\$?[A-Za-z]{1,3}\$?[0-9]+)
  | (?P<bool>(?:TRUE|FALSE)\b)
  | (?P<ref>\$?[A-Za-z]{1,3}\$?[0-9]+)
  | (?P<num>(?:[0-9]+\.?[0-9]*|\.[0-9]+)(?:[eE][+-]?[0-9]+)?)
  | (?P<op><=|>=|<>|[-+*/^&=<>(),])
    """,
    re.VERBOSE,
)

_CMP_OPS = ("=", "<>", "<", ">", "<=", ">=")


def tokenize(expr: str) -> list[tuple[str, str]]:
    pos = 0
    out = []
    while pos < len(expr):
        m = _TOKEN_RE.match(expr, pos)
        if not m:
            raise FormulaError(f"unexpected character {expr[pos]!r} at {pos} in {expr!r}")
        kind = m.lastgroup
        if kind != "ws":
            out.append((kind, m.group()))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]], src: str):
        self.toks = tokens
        self.i = 0
        self.src = src

    def peek(self) -> tuple[str, str] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self) -> tuple[str, str]:
        tok = self.peek()
        if tok is None:
            raise FormulaError(f"unexpected end of formula {self.src!r}")
        self.i += 1
        return tok

    def expect(self, text: str) -> None:
        kind, val = self.take()
        if val != text:
            raise FormulaError(f"expected {text!r}, got {val!r} in {self.src!r}")

    def at_op(self, *ops: str) -> str | None:
        tok = self.peek()
        if tok is not None and tok[0] == "op" and tok[1] in ops:
            return tok[1]
        return None

    def parse(self):
        node = self.comparison()
        if self.peek() is not None:
            raise FormulaError(f"trailing input {self.peek()[1]!r} in {self.src!r}")
        return node

    def comparison(self):
        node = self.concat()
        while (op := self.at_op(*_CMP_OPS)) is not None:
            self.i += 1
            node = ("bin", op, node, self.concat())
        return node

    def concat(self):
        node = self.additive()
        while self.at_op("&"):
            self.i += 1
            node = ("bin", "&", node, self.additive())
        return node

    def additive(self):
        node = self.term()
        while (op := self.at_op("+", "-")) is not None:
            self.i += 1
            node = ("bin", op, node, self.term())
        return node

    def term(self):
        node = self.power()
        while (op := self.at_op("*", "/")) is not None:
            self.i += 1
            node = ("bin", op, node, self.power())
        return node

    def power(self):
        node = self.unary()
        while self.at_op("^"):
            self.i += 1
            node = ("bin", "^", node, self.unary())
        return node

    def unary(self):
        if (op := self.at_op("-", "+")) is not None:
            self.i += 1
            operand = self.unary()
            return ("neg", operand) if op == "-" else ("pos", operand)
        return self.primary()

    def primary(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", float(val))
        if kind == "str":
            return ("str", val[1:-1].replace('""', '"'))
        if kind == "bool":
            return ("bool", val == "TRUE")
        if kind == "ref":
            return ("ref", parse_ref(val))
        if kind == "range":
            a, b = val.split(":")
            (r1, c1), (r2, c2) = parse_ref(a), parse_ref(b)
            return ("range", (min(r1, r2), min(c1, c2), max(r1, r2), max(c1, c2)))
        if kind == "func":
            name = val.upper()
            self.expect("(")
            args = []
            if not self.at_op(")"):
                args.append(self.comparison())
                while self.at_op(","):
                    self.i += 1
                    args.append(self.comparison())
            self.expect(")")
            return ("call", name, tuple(args))
        if kind == "op" and val == "(":
            node = self.comparison()
            self.expect(")")
            return node
        raise FormulaError(f"unexpected token {val!r} in {self.src!r}")


@lru_cache(maxsize=65536)
def parse(expr: str):
    """Parse a formula (with or without a leading ``=``) into a tuple AST."""
    if expr.startswith("="):
        expr = expr[1:]
    return _Parser(tokenize(expr), expr).parse()


def referenced_cells(expr: str) -> set[tuple[int, int]]:
    out: set[tuple[int, int]] = set()

    def walk(node) -> None:
        tag = node[0]
        if tag == "ref":
            out.add(node[1])
        elif tag == "range":
            r1, c1, r2, c2 = node[1]
            out.update((r, c) for r in range(r1, r2 + 1) for c in range(c1, c2 + 1))
        elif tag in ("neg", "pos"):
            walk(node[1])
        elif tag == "bin":
            walk(node[2])
            walk(node[3])
        elif tag == "call":
            for a in node[2]:
                walk(a)

    walk(parse(expr))
    return out


def to_number(v: Value) -> float:
    if v is None:
        return 0.0
    if isinstance(v, bool):
        return 1.0 if v else 0.0
    if isinstance(v, (int, float)):
        return float(v)
    try:
        return float(v)
    except ValueError:
        raise FormulaError(f"#VALUE! cannot use {v!r} as a number") from None


def to_text(v: Value) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "TRUE" if v else "FALSE"
    if isinstance(v, float) and v.is_integer() and abs(v) < 2**53:
        return str(int(v))
    return str(v)


def _truthy(v: Value) -> bool:
    if isinstance(v, str):
        up = v.upper()
        if up in ("TRUE", "FALSE"):
            return up == "TRUE"
        raise FormulaError(f"#VALUE! {v!r} is not a condition")
    return to_number(v) != 0.0


def _type_rank(v: Value) -> int:
    if isinstance(v, bool):
        return 2
    if isinstance(v, str):
        return 1
    return 0


def _compare(op: str, a: Value, b: Value) -> bool:
    if a is None:
        a = "" if isinstance(b, str) else (False if isinstance(b, bool) else 0.0)
    if b is None:
        b = "" if isinstance(a, str) else (False if isinstance(a, bool) else 0.0)
    ra, rb = _type_rank(a), _type_rank(b)
    if ra != rb:
        a, b = ra, rb
    elif ra == 1:
        a, b = a.lower(), b.lower()
    elif ra == 0:
        a, b = float(a), float(b)
    if op == "=":
        return a == b
    if op == "<>":
        return a != b
    if op == "<":
        return a < b
    if op == ">":
        return a > b
    if op == "<=":
        return a <= b
    return a >= b


def _power(a: float, b: float) -> float:
    if b == 2.0:
        return a * a  # correctly rounded square; libm pow() is not always
    try:
        return math.pow(a, b)
    except (ValueError, OverflowError):
        raise FormulaError(f"#NUM! {a}^{b}") from None


def _flatten_numbers(values) -> list[float]:
    return [float(v) for v in values if isinstance(v, (int, float)) and not isinstance(v, bool)]


def _num_fn(fn: Callable[[float], float], name: str):
    def call(x: float) -> float:
        try:
            return fn(x)
        except ValueError:
            raise FormulaError(f"#NUM! {name}({x})") from None
    return call


_UNARY = {
    "SIN": _num_fn(math.sin, "SIN"),
    "COS": _num_fn(math.cos, "COS"),
    "ASIN": _num_fn(math.asin, "ASIN"),
    "SQRT": _num_fn(math.sqrt, "SQRT"),
    "RADIANS": math.radians,
    "ABS": abs,
}


class Evaluator:
    """Evaluates cells of a WorkbookModel, with optional user-input overrides.

    ``overrides`` maps references like ``"B7"`` to the value a user would type.
    """

    def __init__(self, model: WorkbookModel, overrides: Mapping[str, Value] | None = None):
        self.model = model
        self.overrides = {parse_ref(k): v for k, v in (overrides or {}).items()}
        self._memo: dict[tuple[int, int], Value] = {}
        self._active: set[tuple[int, int]] = set()

    def __getitem__(self, ref: str) -> Value:
        return self.cell(*parse_ref(ref))

    def cell(self, row: int, col: int) -> Value:
        key = (row, col)
        if key in self.overrides:
            return self.overrides[key]
        if key in self._memo:
            return self._memo[key]
        v = self.model.cells.get(key)
        if v is None:
            result = None
        elif isinstance(v, Number):
            result = v.value
        elif isinstance(v, Text):
            result = v.value
        elif isinstance(v, Formula):
            if key in self._active:
                raise FormulaError(f"circular reference through row {row} column {col}")
            self._active.add(key)
            try:
                result = self._eval(parse(v.expr))
            finally:
                self._active.discard(key)
            if isinstance(result, list):
                raise FormulaError(f"#VALUE! range used as a cell value at row {row} column {col}")
        else:
            raise TypeError(f"unsupported cell value {v!r}")
        self._memo[key] = result
        return result

    def evaluate(self, expr: str) -> Value:
        return self._eval(parse(expr))

    def _range(self, bounds) -> list[Value]:
        r1, c1, r2, c2 = bounds
        return [self.cell(r, c) for r in range(r1, r2 + 1) for c in range(c1, c2 + 1)]

    def _eval(self, node) -> Value:
        tag = node[0]
        if tag in ("num", "str", "bool"):
            return node[1]
        if tag == "ref":
            return self.cell(*node[1])
        if tag == "range":
            return self._range(node[1])
        if tag == "neg":
            return -to_number(self._eval(node[1]))
        if tag == "pos":
            return self._eval(node[1])
        if tag == "bin":
            return self._binary(node[1], self._eval(node[2]), self._eval(node[3]))
        if tag == "call":
            return self._call(node[1], node[2])
        raise FormulaError(f"bad node {node!r}")

    def _binary(self, op: str, a: Value, b: Value) -> Value:
        if op in _CMP_OPS:
            return _compare(op, a, b)
        if op == "&":
            return to_text(a) + to_text(b)
        x, y = to_number(a), to_number(b)
        if op == "+":
            return x + y
        if op == "-":
            return x - y
        if op == "*":
            return x * y
        if op == "/":
            if y == 0.0:
                raise FormulaError("#DIV/0!")
            return x / y
        if op == "^":
            return _power(x, y)
        raise FormulaError(f"unknown operator {op!r}")

    def _call(self, name: str, args: tuple) -> Value:
        if name == "IF":
            if not 2 <= len(args) <= 3:
                raise FormulaError("IF takes 2 or 3 arguments")
            if _truthy(self._eval(args[0])):
                return self._eval(args[1])
            return self._eval(args[2]) if len(args) == 3 else False
        if name == "PI":
            if args:
                raise FormulaError("PI takes no arguments")
            return math.pi
        if name in _UNARY:
            if len(args) != 1:
                raise FormulaError(f"{name} takes exactly one argument")
            return _UNARY[name](to_number(self._eval(args[0])))
        if name in ("MIN", "MAX"):
            nums: list[float] = []
            for a in args:
                v = self._eval(a)
                if isinstance(v, list):
                    nums.extend(_flatten_numbers(v))
                else:
                    nums.append(to_number(v))
            if not nums:
                return 0.0
            return min(nums) if name == "MIN" else max(nums)
        if name == "SUMPRODUCT":
            arrays = []
            for a in args:
                v = self._eval(a)
                arrays.append(v if isinstance(v, list) else [v])
            if not arrays or len({len(x) for x in arrays}) != 1:
                raise FormulaError("#VALUE! SUMPRODUCT arrays differ in size")
            total = 0.0
            for items in zip(*arrays):
                prod = 1.0
                for v in items:
                    # non-numeric entries count as zero, as in spreadsheet apps
                    prod *= float(v) if isinstance(v, (int, float)) and not isinstance(v, bool) else 0.0
                total += prod
            return total
        raise FormulaError(f"#NAME? unsupported function {name}")


def evaluate_formulas(model: WorkbookModel, overrides: Mapping[str, Value] | None = None) -> dict:
    """Evaluate every formula cell; returns ``{(row, col): value}``."""
    ev = Evaluator(model, overrides)
    return {k: ev.cell(*k) for k, v in sorted(model.cells.items()) if isinstance(v, Formula)}

