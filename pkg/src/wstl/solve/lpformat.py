"""CPLEX LP text export and plain-text solution import."""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from ..encode import BINARY, EQ, GE, LE, LinExpr, MILPModel
from .bnb import EXTERNAL, Solution

CONST_VAR = "obj_const"
_SENSE = {LE: "<=", GE: ">=", EQ: "="}
_LINE_WIDTH = 200


def _num(x: float) -> str:
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    return repr(float(x))


def _terms(expr: LinExpr, names: list[str]) -> list[str]:
    out = []
    for v in sorted(expr.terms):
        c = expr.terms[v]
        if c == 0.0:
            continue
        out.append(f"{'-' if c < 0 else '+'} {_num(abs(c))} {names[v]}")
    return out


def _wrap(head: str, parts: list[str]) -> list[str]:
    lines, cur = [], head
    for p in parts:
        if len(cur) + len(p) + 1 > _LINE_WIDTH:
            lines.append(cur)
            cur = "   "
        cur += " " + p
    lines.append(cur)
    return lines


def lp_text(model: MILPModel) -> str:
    names = [v.name for v in model.variables]
    const = model.objective.constant
    lines = [r"\ wstl weight-learning model", "Maximize" if model.maximize else "Minimize"]
    obj = _terms(model.objective, names)
    if const != 0.0:
        obj.append(f"{'-' if const < 0 else '+'} {_num(abs(const))} {CONST_VAR}")
    if not obj:
        obj = [f"0 {names[0] if names else CONST_VAR}"]
    lines += _wrap(" obj:", obj)
    lines.append("Subject To")
    for con in model.constraints:
        parts = _terms(con.expr, names) or [f"0 {names[0]}"]
        lines += _wrap(f" {con.name}:", parts + [_SENSE[con.sense], _num(con.rhs)])
    lines.append("Bounds")
    for v in model.variables:
        if v.kind == BINARY:
            continue
        if math.isinf(v.lb) and math.isinf(v.ub):
            lines.append(f" {v.name} free")
        elif v.lb == v.ub:
            lines.append(f" {v.name} = {_num(v.lb)}")
        else:
            lines.append(f" {_num(v.lb)} <= {v.name} <= {_num(v.ub)}")
    if const != 0.0 or not names:
        lines.append(f" {CONST_VAR} = 1")
    bins = [v.name for v in model.variables if v.kind == BINARY]
    if bins:
        lines.append("Binaries")
        lines += _wrap("", bins)
    lines.append("End")
    return "\n".join(lines) + "\n"


def export_lp(model: MILPModel, path: str | Path) -> Path:
    """Write ``model`` in CPLEX LP format; variable names are tag + index."""
    path = Path(path)
    path.write_text(lp_text(model))
    return path


def import_solution(path: str | Path, model: MILPModel, status: str = EXTERNAL) -> Solution:
    """Read ``<varname> <value>`` lines written by an external solver.

    Unknown names (including the objective-constant helper) are ignored;
    missing model variables are left as NaN.
    """
    x = np.full(model.n_vars, np.nan)
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected '<name> <value>', got {raw!r}")
        name, value = parts
        try:
            x[model.var_index(name)] = float(value)
        except KeyError:
            continue
    obj = model.objective_value(np.nan_to_num(x)) if not np.isnan(x).any() else math.nan
    return Solution(x, obj, status, names=[v.name for v in model.variables])
