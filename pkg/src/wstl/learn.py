"""Prune, encode, warm-start, solve, extract: the end-to-end learning run."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import SignalStore
from .encode import DEFAULT_MARGIN, DEFAULT_V_BOUND, DECISION, SATISFIED, VIOLATED, Problem, build_problem
from .formula import FormulaNode, Valuation
from .solve import (
    OPTIMAL,
    FEASIBLE_TIME_LIMIT,
    SamplerConfig,
    Solution,
    export_lp,
    extract_valuation,
    import_solution,
    random_search,
    solve_internal,
)

WARM_START = "warm-start"
LP_EXPORTED = "lp-exported"


@dataclass
class LearnConfig:
    samples: int = 10000
    seed: int = 0
    v_bound: float = DEFAULT_V_BOUND
    time_limit: float | None = None
    margin: float = DEFAULT_MARGIN
    solver: str = "internal"  # internal | lp-export
    lp_path: str | Path | None = None
    solution_path: str | Path | None = None  # external result to import


@dataclass
class LearnResult:
    valuation: Valuation
    objective: float
    status: str
    rs_valuation: Valuation
    rs_objective: float
    problem: Problem
    solution: Solution | None
    report: dict = field(default_factory=dict)


def _pruning_stats(problem: Problem) -> dict:
    kept = sum(t.pruned.kept for t in problem.trees.values())
    deleted = sum(t.pruned.deleted for t in problem.trees.values())
    active = len(problem.vvars)
    return {
        "rct_nodes_kept": kept,
        "rct_nodes_deleted": deleted,
        "parameters": len(problem.table),
        "active_parameters": active,
        "constant_signals": sum(t.constant for t in problem.trees.values()),
    }


def learn(formula: FormulaNode, store: SignalStore, dataset, config: LearnConfig | None = None) -> LearnResult:
    config = config or LearnConfig()
    start = time.perf_counter()
    problem = build_problem(None, dataset, formula, store, v_bound=config.v_bound, margin=config.margin)
    model = problem.model
    sampler = SamplerConfig(config.samples, config.seed, (-config.v_bound, config.v_bound))
    rs_val, rs_obj = random_search(problem, sampler)
    warm = problem.complete(rs_val.log())

    solution = None
    if config.lp_path is not None:
        export_lp(model, config.lp_path)
    if config.solver == "internal":
        solution = solve_internal(model, config.time_limit, warm_start=warm, heuristic=problem.heuristic)
    elif config.solver == "lp-export":
        if config.solution_path is not None:
            solution = import_solution(config.solution_path, model)
    else:
        raise ValueError(f"unknown solver {config.solver!r}")

    if solution is not None and solution.has_solution and config.solver == "internal":
        # recompute tree values exactly from the log-weights; LP points carry round-off
        exact = problem.complete(problem.logw_from_assignment(solution.x))
        if model.violation(exact) <= 1e-9 and model.objective_value(exact) >= solution.objective - 1e-9:
            solution.x = exact
    solver_objective = None
    if solution is not None and solution.has_solution:
        solver_objective = solution.objective
        if np.array_equal(solution.x, warm):
            valuation = rs_val  # the search certified the warm start itself
        else:
            valuation = extract_valuation(solution, model, problem.table)
        objective, status = solution.objective, solution.status
    else:
        valuation, objective = rs_val, rs_obj
        status = LP_EXPORTED if config.solver == "lp-export" else (solution.status if solution else WARM_START)
    recount = problem.objective.score(valuation)
    if problem.mode == "demonstrations":
        # same evaluator as the random-search score, so the two compare exactly
        objective = recount

    counts = problem.counts()
    report = {
        "mode": problem.mode,
        "status": status,
        "objective": objective,
        "recounted_objective": recount,
        "solver_objective": solver_objective,
        "rs_objective": rs_obj,
        "pairs": len(problem.pairs),
        "decision_pairs": counts[DECISION],
        "constant_satisfied_pairs": counts[SATISFIED],
        "constant_violated_pairs": counts[VIOLATED],
        "variables": model.n_vars,
        "binaries": len(model.binaries()),
        "constraints": len(model.constraints),
        "big_m": model.big_m,
        **_pruning_stats(problem),
        "nodes": solution.nodes if solution else 0,
        "wall_time": time.perf_counter() - start,
    }
    if solution is not None and math.isfinite(solution.bound):
        report["bound"] = solution.bound
    return LearnResult(valuation, objective, status, rs_val, rs_obj, problem, solution, report)


def solved(status: str) -> bool:
    return status in (OPTIMAL, FEASIBLE_TIME_LIMIT)
