"""Best-bound branch-and-bound over :class:`wstl.encode.MILPModel`."""

from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..encode import MILPModel
from .simplex import BoundedLP

log = logging.getLogger(__name__)

INT_TOL = 1e-6
FEAS_CHECK = 1e-6

OPTIMAL = "optimal"
FEASIBLE_TIME_LIMIT = "feasible-time-limit"
NO_SOLUTION = "no-solution-time-limit"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
EXTERNAL = "external"


@dataclass
class Solution:
    """A model assignment; ``objective`` is in the model's own sense."""

    x: np.ndarray | None
    objective: float
    status: str
    wall_time: float = 0.0
    names: list[str] = field(default_factory=list)
    nodes: int = 0
    bound: float = math.nan

    @property
    def assignment(self) -> dict[str, float]:
        if self.x is None:
            return {}
        return dict(zip(self.names, map(float, self.x)))

    def value(self, name: str) -> float:
        return float(self.x[self.names.index(name)])

    @property
    def has_solution(self) -> bool:
        return self.x is not None


@dataclass(order=True)
class _Node:
    key: tuple
    fixes: dict = field(compare=False)
    basis: tuple | None = field(compare=False)
    depth: int = field(compare=False, default=0)


def solve_internal(
    model: MILPModel,
    time_limit: float | None = None,
    warm_start: Sequence[float] | None = None,
    heuristic: Callable[[np.ndarray], tuple[np.ndarray, float]] | None = None,
    node_limit: int | None = None,
) -> Solution:
    """Maximize (or minimize) ``model`` exactly with LP-based branch-and-bound.

    ``warm_start`` seeds the incumbent when it is feasible. ``heuristic`` maps
    an LP point to a candidate ``(x, objective)``; it is tried at every node.
    With no limits hit the result is proven optimal.
    """
    start = time.perf_counter()
    names = [v.name for v in model.variables]
    c, A, senses, b = model.matrices()
    sense = 1.0 if model.maximize else -1.0  # search maximizes sense * objective
    const = sense * model.objective.constant
    lp = BoundedLP(-sense * c, A, senses, b)
    base_lb, base_ub = model.bounds()
    binaries = np.array(model.binaries(), dtype=int)
    integral = model.integral_objective()

    def to_max(lp_obj: float) -> float:
        return -lp_obj + const

    def user_obj(max_obj: float) -> float:
        return float(sense * max_obj)

    def elapsed() -> float:
        return time.perf_counter() - start

    best_x: np.ndarray | None = None
    best = -math.inf  # internal maximization value

    def offer(x, obj_user: float) -> bool:
        nonlocal best_x, best
        obj = sense * obj_user
        if obj <= best + 1e-9:
            return False
        if model.violation(x) > FEAS_CHECK:
            return False
        best_x, best = np.array(x, dtype=float), obj
        return True

    def worth(bound: float) -> bool:
        if best == -math.inf:
            return True
        if integral:
            return bound >= best + 1.0 - 1e-6
        return bound > best + 1e-9 * max(1.0, abs(best))

    if warm_start is not None:
        ws = np.asarray(warm_start, dtype=float)
        offer(ws, model.objective_value(ws))

    # bound from variable boxes alone: an incumbent reaching it is optimal without search
    cmax = sense * c
    box_bound = const + float(np.sum(np.maximum(cmax * base_lb, cmax * base_ub), where=cmax != 0, initial=0.0))
    if best_x is not None and best >= box_bound - 1e-9:
        obj = float(round(user_obj(best))) if integral else user_obj(best)
        return Solution(best_x, obj, OPTIMAL, elapsed(), names, 0, user_obj(box_bound))

    counter = itertools.count()
    heap: list[_Node] = [_Node((-math.inf, 0, 0), {}, None, 0)]
    nodes = 0
    hit_limit = False
    unresolved: list[float] = []

    while heap:
        if (time_limit is not None and elapsed() > time_limit) or (node_limit is not None and nodes >= node_limit):
            hit_limit = True
            break
        node = heapq.heappop(heap)
        parent_bound = -node.key[0]
        if nodes and not worth(parent_bound):
            continue
        lb, ub = base_lb.copy(), base_ub.copy()
        for j, v in node.fixes.items():
            lb[j] = ub[j] = v
        res = lp.solve(lb, ub, node.basis)
        if res.status not in ("optimal", "infeasible", "unbounded") and node.basis is not None:
            res = lp.solve(lb, ub)
        nodes += 1
        if res.status == "unbounded":
            if nodes == 1:
                return Solution(None, math.inf if model.maximize else -math.inf, UNBOUNDED, elapsed(), names, nodes)
            continue
        if res.status == "infeasible":
            continue
        if res.status != "optimal":
            # unresolved relaxation: keep its parent's bound so optimality is never claimed
            log.warning("bnb: node LP ended with %s; search marked incomplete", res.status)
            unresolved.append(parent_bound)
            continue
        x = res.x
        bound = to_max(res.objective)
        if integral:
            bound = math.floor(bound + 1e-6)
        if not worth(bound):
            continue
        if heuristic is not None:
            hx, hobj = heuristic(x)
            offer(hx, hobj)
            if not worth(bound):
                continue
        frac = np.abs(x[binaries] - np.round(x[binaries])) if len(binaries) else np.zeros(0)
        if not len(frac) or frac.max() <= INT_TOL:
            _accept_integral(model, lp, x, lb, ub, binaries, offer)
            continue
        k = int(np.argmax(frac))
        j = int(binaries[k])
        up_first = x[j] >= 0.5
        order = (0.0, 1.0) if up_first else (1.0, 0.0)  # preferred child pushed last
        for val in order:
            fixes = dict(node.fixes)
            fixes[j] = val
            heapq.heappush(heap, _Node((-bound, -(node.depth + 1), -next(counter)), fixes, res.basis, node.depth + 1))

    wall = elapsed()
    remaining = [-n.key[0] for n in heap if worth(-n.key[0])] + [u for u in unresolved if worth(u)]
    incomplete = hit_limit or bool(remaining)
    if incomplete and remaining:
        gap_bound = max(remaining + ([best] if best > -math.inf else []))
    else:
        gap_bound = best
    if best_x is None:
        status = NO_SOLUTION if incomplete else INFEASIBLE
        return Solution(None, math.nan, status, wall, names, nodes, user_obj(gap_bound) if incomplete else math.nan)
    status = FEASIBLE_TIME_LIMIT if remaining else OPTIMAL
    obj = user_obj(best)
    if integral:
        obj = float(round(obj))
    log.debug("bnb: %s obj=%s nodes=%d %.3fs", status, obj, nodes, wall)
    return Solution(best_x, obj, status, wall, names, nodes, user_obj(gap_bound))


def _accept_integral(model, lp, x, lb, ub, binaries, offer):
    """Snap an integral LP point and re-solve the continuous part exactly."""
    xr = np.array(x, dtype=float)
    xr[binaries] = np.round(xr[binaries])
    if offer(xr, model.objective_value(xr)):
        return
    lb2, ub2 = lb.copy(), ub.copy()
    lb2[binaries] = ub2[binaries] = xr[binaries]
    res = lp.solve(lb2, ub2)
    if res.status == "optimal":
        xs = res.x
        xs[binaries] = xr[binaries]
        offer(xs, model.objective_value(xs))
