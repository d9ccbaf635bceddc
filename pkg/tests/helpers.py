"""Generators and independent oracles shared by the test modules."""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import linprog

from wstl.data import RankingDataset
from wstl.evaluate import induced_ranking, scores
from wstl.formula import (
    Always,
    And,
    Eventually,
    Implies,
    Kind,
    Not,
    Or,
    Release,
    Until,
    Valuation,
    collect_parameters,
    horizon,
    parse,
    pred,
    to_pnf,
)
from wstl.rct import Signal

CHANNELS = ("x", "y")


def random_formula(rng: np.random.Generator, depth: int, max_bound: int = 6, until: bool = True):
    """A random formula of at most ``depth`` operator levels, intervals inside [0, max_bound]."""
    if depth == 0 or rng.random() < 0.2:
        ch = CHANNELS[rng.integers(len(CHANNELS))]
        c = float(np.round(rng.uniform(-1, 1), 1))
        return pred({ch: 1.0}, -c, ">=" if rng.random() < 0.5 else "<=")

    def interval():
        a = int(rng.integers(0, max_bound + 1))
        b = int(rng.integers(a, max_bound + 1))
        return (a, b)

    ops = ["and", "or", "not", "implies", "F", "G"] + (["U", "R"] if until else [])
    op = ops[rng.integers(len(ops))]
    sub = lambda: random_formula(rng, depth - 1, max_bound, until)  # noqa: E731
    if op == "and":
        return And(sub(), sub())
    if op == "or":
        return Or(sub(), sub())
    if op == "implies":
        return Implies(sub(), sub())
    if op == "not":
        return Not(sub())
    if op == "F":
        return Eventually(sub(), interval())
    if op == "G":
        return Always(sub(), interval())
    if op == "U":
        return Until(sub(), sub(), interval())
    return Release(sub(), sub(), interval())


def random_signal(rng: np.random.Generator, length: int, grid: float | None = None) -> Signal:
    chans = {}
    for ch in CHANNELS:
        v = rng.uniform(-2, 2, length)
        chans[ch] = np.round(v / grid) * grid if grid else v
    return Signal(chans)


def oracle_robustness(f, signal: Signal, t: int = 0) -> float:
    """Textbook quantitative semantics straight from the syntax tree."""
    k = f.kind
    if k is Kind.TRUE:
        return math.inf
    if k is Kind.FALSE:
        return -math.inf
    if k is Kind.PRED:
        e = f.pred.expr
        h = sum(c * signal[name][t] for name, c in e.terms) + e.constant
        return {">=": h, ">": h, "<=": -h, "<": -h}[f.pred.op] if f.pred.op != "=" else -abs(h)
    if k is Kind.NOT:
        return -oracle_robustness(f.children[0], signal, t)
    if k is Kind.AND:
        return min(oracle_robustness(c, signal, t) for c in f.children)
    if k is Kind.OR:
        return max(oracle_robustness(c, signal, t) for c in f.children)
    if k is Kind.IMPLIES:
        return max(-oracle_robustness(f.children[0], signal, t), oracle_robustness(f.children[1], signal, t))
    a, b = f.interval
    if k is Kind.EVENTUALLY:
        return max(oracle_robustness(f.children[0], signal, t + o) for o in range(a, b + 1))
    if k is Kind.ALWAYS:
        return min(oracle_robustness(f.children[0], signal, t + o) for o in range(a, b + 1))
    left, right = f.children

    def until(p, q, neg):
        s = -1.0 if neg else 1.0
        best = -math.inf
        for o in range(a, b + 1):
            stay = min((s * oracle_robustness(p, signal, u) for u in range(t, t + o)), default=math.inf)
            best = max(best, min(stay, s * oracle_robustness(q, signal, t + o)))
        return best

    if k is Kind.UNTIL:
        return until(left, right, False)
    # p R q = !(!p U !q)
    return -until(left, right, True)


def enumerate_milp(model) -> float:
    """Best objective over all binary assignments, one HiGHS LP per assignment."""
    c, A, senses, b = model.matrices()
    lb, ub = model.bounds()
    bins = model.binaries()
    sign = -1.0 if model.maximize else 1.0
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for row, s, rhs in zip(A, senses, b):
        if s == "<=":
            A_ub.append(row)
            b_ub.append(rhs)
        elif s == ">=":
            A_ub.append(-row)
            b_ub.append(-rhs)
        else:
            A_eq.append(row)
            b_eq.append(rhs)
    # rows over binaries alone (selector sums) rule out most assignments before any LP
    is_bin = np.zeros(len(c), dtype=bool)
    is_bin[bins] = True
    pure = [i for i, row in enumerate(A) if np.any(row) and not np.any(row[~is_bin])]
    best = -math.inf if model.maximize else math.inf
    for assign in itertools.product((0.0, 1.0), repeat=len(bins)):
        x = np.zeros(len(c))
        x[bins] = assign
        if any(not _row_ok(A[i] @ x, senses[i], b[i]) for i in pure):
            continue
        lo, hi = lb.copy(), ub.copy()
        lo[bins] = hi[bins] = assign
        res = linprog(
            sign * c,
            A_ub=np.array(A_ub) if A_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(A_eq) if A_eq else None,
            b_eq=np.array(b_eq) if b_eq else None,
            bounds=list(zip(lo, hi)),
            method="highs",
        )
        if res.status != 0:
            continue
        val = sign * res.fun + model.objective.constant
        best = max(best, val) if model.maximize else min(best, val)
    return best


def _row_ok(lhs: float, sense: str, rhs: float, tol: float = 1e-9) -> bool:
    if sense == "<=":
        return lhs <= rhs + tol
    if sense == ">=":
        return lhs >= rhs - tol
    return abs(lhs - rhs) <= tol


def random_store(rng: np.random.Generator, n: int, length: int, grid: float | None = None) -> dict:
    return {f"s{i}": Signal(random_signal(rng, length, grid).channels, f"s{i}") for i in range(n)}


def small_instance(seed: int, n_signals: int = 4, depth: int = 2, max_bound: int = 2):
    """``(formula, store)`` with every signal long enough for the formula."""
    rng = np.random.default_rng(seed)
    f = to_pnf(random_formula(rng, depth, max_bound, until=False))
    store = random_store(rng, n_signals, horizon(f) + int(rng.integers(0, 2)))
    return f, store


REALIZABLE_FORMULA = "F[0,2](G[0,2](x >= 0.3) & y >= 0.2)"


def realizable_instance(seed: int = 0, length: int = 6):
    """Eight signals ranked by a hidden valuation under a depth-3 formula."""
    rng = np.random.default_rng(seed)
    f = to_pnf(parse(REALIZABLE_FORMULA))
    store = {
        f"s{i}": Signal({"x": rng.uniform(-1, 1.5, length).round(3), "y": rng.uniform(-1, 1.5, length).round(3)}, f"s{i}")
        for i in range(8)
    }
    table = collect_parameters(f, length)
    truth = Valuation({p: float(np.exp(rng.uniform(-1, 1))) for p in table})
    sc = scores(truth, f, store, list(store), table)
    return f, store, RankingDataset(induced_ranking(sc)), truth, sc
