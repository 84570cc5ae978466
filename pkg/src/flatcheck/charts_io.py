"""Loading and saving chart documents.

A chart document is either {"builtin": name} or

    { "name": str, "n": int, "domain": [[lo, hi], ...],
      "frame": [[expr, ...], ...] }

with entries written in a small expression grammar: variables x1..xn,
rational literals, + - * /, integer powers (** or ^), and sin/cos/exp.
Entries that stay inside the rational fragment parse onto the exact
backend; sin/cos/exp force the numeric backend.  The FLATCHECK_BACKEND
environment variable (exact | numeric | auto) overrides the choice, where
"exact" refuses charts that need transcendentals.
"""

from __future__ import annotations

import ast
import json
import math
import os
import re
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .frames import ChartError, FrameChart
from .rational import Poly, RationalFunc

_NUMERIC_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp}
_VAR_RE = re.compile(r"^x([1-9]\d*)$")


class _ExactBuilder(ast.NodeVisitor):
    def __init__(self, n: int):
        self.n = n

    def build(self, node) -> RationalFunc:
        if isinstance(node, ast.Expression):
            return self.build(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, int):
                return RationalFunc(Poly.const(self.n, node.value))
            if isinstance(node.value, float):
                return RationalFunc(Poly.const(self.n, Fraction(str(node.value))))
            raise ChartError(f"unsupported literal {node.value!r}")
        if isinstance(node, ast.Name):
            m = _VAR_RE.match(node.id)
            if not m:
                raise ChartError(f"unknown symbol '{node.id}' (variables are x1..x{self.n})")
            idx = int(m.group(1)) - 1
            if idx >= self.n:
                raise ChartError(f"variable {node.id} out of range for n={self.n}")
            return RationalFunc(Poly.var(self.n, idx))
        if isinstance(node, ast.UnaryOp):
            val = self.build(node.operand)
            if isinstance(node.op, ast.USub):
                return val.scale(-1)
            if isinstance(node.op, ast.UAdd):
                return val
            raise ChartError("unsupported unary operator")
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                base = self.build(node.left)
                try:
                    exp = ast.literal_eval(node.right)
                except ValueError:
                    raise ChartError("exponents must be integer literals") from None
                if not isinstance(exp, int):
                    raise ChartError("exponents must be integer literals")
                out = RationalFunc(Poly.const(self.n, 1))
                for _ in range(abs(exp)):
                    out = out * base
                return out.inverse() if exp < 0 else out
            left, right = self.build(node.left), self.build(node.right)
            if isinstance(node.op, ast.Add):
                return left + right
            if isinstance(node.op, ast.Sub):
                return left - right
            if isinstance(node.op, ast.Mult):
                return left * right
            if isinstance(node.op, ast.Div):
                return left / right
            raise ChartError("unsupported binary operator")
        if isinstance(node, ast.Call):
            raise _NeedsNumeric(node.func.id if isinstance(node.func, ast.Name) else "?")
        raise ChartError(f"unsupported syntax: {ast.dump(node)}")


class _NeedsNumeric(Exception):
    pass


def parse_exact_expr(src: str, n: int) -> RationalFunc:
    try:
        tree = ast.parse(src.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ChartError(f"cannot parse expression {src!r}: {exc.msg} (offset {exc.offset})") from None
    return _ExactBuilder(n).build(tree)


def parse_numeric_expr(src: str, n: int) -> Callable[[Sequence[float]], float]:
    try:
        tree = ast.parse(src.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ChartError(f"cannot parse expression {src!r}: {exc.msg} (offset {exc.offset})") from None

    def check(node) -> None:
        if isinstance(node, (ast.Expression, ast.Load)):
            pass
        elif isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)):
                raise ChartError(f"unsupported literal {node.value!r}")
        elif isinstance(node, ast.Name):
            m = _VAR_RE.match(node.id)
            if not m or int(m.group(1)) > n:
                raise ChartError(f"unknown symbol '{node.id}' (variables are x1..x{n})")
        elif isinstance(node, ast.UnaryOp):
            if not isinstance(node.op, (ast.USub, ast.UAdd)):
                raise ChartError("unsupported unary operator")
        elif isinstance(node, ast.BinOp):
            if not isinstance(node.op, (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)):
                raise ChartError("unsupported binary operator")
        elif isinstance(node, ast.Call):
            if not (isinstance(node.func, ast.Name) and node.func.id in _NUMERIC_FUNCS):
                raise ChartError("only sin, cos, exp calls are allowed")
            if len(node.args) != 1 or node.keywords:
                raise ChartError("transcendental calls take exactly one argument")
            check(node.args[0])
            return
        elif isinstance(node, (ast.operator, ast.unaryop)):
            pass
        else:
            raise ChartError(f"unsupported syntax: {type(node).__name__}")
        for child in ast.iter_child_nodes(node):
            check(child)

    check(tree)
    code = compile(tree, "<chart-entry>", "eval")

    def fn(point: Sequence[float]) -> float:
        scope = dict(_NUMERIC_FUNCS)
        for i, v in enumerate(point):
            scope[f"x{i + 1}"] = float(v)
        return float(eval(code, {"__builtins__": {}}, scope))

    return fn


def _parse_bound(v) -> Fraction:
    if isinstance(v, str):
        return Fraction(v)
    return Fraction(str(v)) if isinstance(v, float) else Fraction(v)


def chart_from_json(doc: dict, backend: str | None = None) -> FrameChart:
    """Build a FrameChart from a chart document.

    ``backend`` of None consults FLATCHECK_BACKEND (default auto: exact
    when every entry is a rational function).
    """
    from .catalog import get_chart  # circular at module load otherwise

    if backend is None:
        backend = os.environ.get("FLATCHECK_BACKEND", "auto")
    if backend not in ("exact", "numeric", "auto"):
        raise ChartError(f"unknown backend '{backend}' (exact | numeric | auto)")

    if "builtin" in doc:
        chart = get_chart(str(doc["builtin"]))
        if backend == "exact" and chart.backend != "exact":
            raise ChartError(f"chart '{chart.name}' has no exact form")
        if backend == "numeric" and chart.backend == "exact":
            return _exact_to_numeric(chart)
        return chart

    try:
        name = str(doc["name"])
        n = int(doc["n"])
        domain = [( _parse_bound(lo), _parse_bound(hi)) for lo, hi in doc["domain"]]
        frame = doc["frame"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ChartError(f"malformed chart document (field: {exc})") from None
    if len(frame) != n or any(len(row) != n for row in frame):
        raise ChartError(f"chart 'frame' must be an {n}x{n} array of expressions")

    if backend in ("exact", "auto"):
        try:
            entries = [[parse_exact_expr(str(e), n) for e in row] for row in frame]
            return FrameChart(name, n, domain, entries=entries)
        except _NeedsNumeric as exc:
            if backend == "exact":
                raise ChartError(
                    f"entry uses '{exc.args[0]}', which the exact backend cannot represent")
            # fall through to numeric

    fns = [[parse_numeric_expr(str(e), n) for e in row] for row in frame]

    def evaluator(point):
        return np.array([[fns[i][a](point) for a in range(n)] for i in range(n)])

    return FrameChart(name, n, domain, evaluator=evaluator)


def _exact_to_numeric(chart: FrameChart) -> FrameChart:
    entries = chart.entries

    def evaluator(point):
        return np.array([[entries[i][a].eval_float(point) for a in range(chart.n)]
                         for i in range(chart.n)])

    return FrameChart(chart.name, chart.n, chart.domain, evaluator=evaluator)


def load_chart_file(path: str, backend: str | None = None) -> FrameChart:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ChartError(f"cannot read chart file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ChartError(f"chart file is not valid JSON: line {exc.lineno}, column {exc.colno}") from None
    if not isinstance(doc, dict):
        raise ChartError("chart document must be a JSON object")
    return chart_from_json(doc, backend)
