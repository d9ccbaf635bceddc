"""MILP solving: random-search warm start, internal branch-and-bound, LP export."""

from __future__ import annotations

import math

from ..encode import MILPModel
from ..formula import ParameterTable, Valuation
from .bnb import (
    EXTERNAL,
    FEASIBLE_TIME_LIMIT,
    INFEASIBLE,
    NO_SOLUTION,
    OPTIMAL,
    UNBOUNDED,
    Solution,
    solve_internal,
)
from .lpformat import export_lp, import_solution, lp_text
from .sampling import SamplerConfig, random_search, rs_trials
from .simplex import BoundedLP, LPResult


class MissingVariableError(KeyError):
    pass


def extract_valuation(sol: Solution, model: MILPModel, table: ParameterTable) -> Valuation:
    """``w = exp(v)`` for every parameter with a log-weight variable; the rest stay 1."""
    if sol.x is None:
        raise ValueError(f"solution with status {sol.status} has no assignment")
    by_label = {v.label: i for i, v in enumerate(model.variables) if v.tag == "v"}
    weights = {}
    for pid in table:
        if pid in by_label:
            value = sol.x[by_label[pid]]
            if not math.isfinite(value):
                raise MissingVariableError(f"no value for the log-weight of {pid}")
            weights[pid] = math.exp(value)
        else:
            weights[pid] = 1.0
    return Valuation(weights)


__all__ = [
    "BoundedLP",
    "EXTERNAL",
    "FEASIBLE_TIME_LIMIT",
    "INFEASIBLE",
    "LPResult",
    "MissingVariableError",
    "NO_SOLUTION",
    "OPTIMAL",
    "SamplerConfig",
    "Solution",
    "UNBOUNDED",
    "export_lp",
    "extract_valuation",
    "import_solution",
    "lp_text",
    "random_search",
    "rs_trials",
    "solve_internal",
]
