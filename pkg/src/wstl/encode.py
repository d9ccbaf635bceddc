"""Log-domain MILP encoding of weighted-robustness learning problems.

After pruning, every node of a signal's tree has the root's sign ``s``.
Writing ``v = log w`` and ``y = log |r|``, each weighted min/max becomes a
min/max of sums ``v_p + y_child``:

* ``s = +1``: min stays min, max stays max;
* ``s = -1``: magnitudes order the other way, so min and max swap.

Each min/max over ``k >= 2`` operands is linearized with ``k`` selector
binaries and per-operand big-M constants derived from interval bounds on the
operands. Pair indicators ``z`` switch on a margin constraint between two
signals' root variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .data import PreferencePair, RankingDataset, SignalStore, feedback_mode
from .formula import FormulaNode, ParameterTable, collect_parameters, horizon, is_pnf, to_pnf
from .pruning import PrunedRCT, prune, sign
from .rct import LEAF, MAX, MIN, RCTNode, build_rct, robustness, weighted_robustness_batch

DEFAULT_V_BOUND = 3.0
DEFAULT_MARGIN = 1e-4
DEFAULT_EPS_PRED = 1e-6

CONTINUOUS, BINARY = "continuous", "binary"
LE, GE, EQ = "<=", ">=", "="

SATISFIED, VIOLATED, DECISION = "constant-satisfied", "constant-violated", "decision"


class EncodingError(ValueError):
    pass


# -- model ------------------------------------------------------------------

@dataclass
class LinExpr:
    terms: dict[int, float] = field(default_factory=dict)
    constant: float = 0.0

    @classmethod
    def of(cls, var: int | None = None, coef: float = 1.0, constant: float = 0.0) -> LinExpr:
        return cls({} if var is None else {var: coef}, constant)

    def copy(self) -> LinExpr:
        return LinExpr(dict(self.terms), self.constant)

    def add(self, var: int, coef: float) -> LinExpr:
        self.terms[var] = self.terms.get(var, 0.0) + coef
        return self

    def __add__(self, other: LinExpr) -> LinExpr:
        out = self.copy()
        for v, c in other.terms.items():
            out.add(v, c)
        out.constant += other.constant
        return out

    def __sub__(self, other: LinExpr) -> LinExpr:
        return self + other.scaled(-1.0)

    def scaled(self, k: float) -> LinExpr:
        return LinExpr({v: k * c for v, c in self.terms.items()}, k * self.constant)

    def value(self, x: Sequence[float]) -> float:
        return sum(c * x[v] for v, c in self.terms.items()) + self.constant


@dataclass
class Variable:
    name: str
    tag: str
    kind: str
    lb: float
    ub: float
    label: str = ""


@dataclass
class Constraint:
    expr: LinExpr
    sense: str
    rhs: float
    name: str = ""


@dataclass
class MILPModel:
    """Maximize ``objective`` subject to linear constraints and bounds."""

    variables: list[Variable] = field(default_factory=list)
    constraints: list[Constraint] = field(default_factory=list)
    objective: LinExpr = field(default_factory=LinExpr)
    maximize: bool = True
    big_m: float = 0.0
    _tag_counts: dict = field(default_factory=dict, repr=False)
    _names: dict = field(default_factory=dict, repr=False)

    def add_var(self, tag: str, lb: float, ub: float, kind: str = CONTINUOUS, label: str = "") -> int:
        if kind == BINARY:
            lb, ub = 0.0, 1.0
        if lb > ub:
            raise EncodingError(f"empty bounds [{lb}, {ub}] for {tag}")
        count = self._tag_counts.get(tag, 0)
        self._tag_counts[tag] = count + 1
        name = f"{tag}{count}"
        self.variables.append(Variable(name, tag, kind, float(lb), float(ub), label))
        self._names[name] = len(self.variables) - 1
        return len(self.variables) - 1

    def add_constraint(self, expr: LinExpr, sense: str, rhs: float) -> int:
        """Record ``expr <sense> rhs``; a constant inside ``expr`` moves to the right."""
        if sense not in (LE, GE, EQ):
            raise EncodingError(f"bad sense {sense!r}")
        terms = {v: c for v, c in expr.terms.items() if c != 0.0}
        name = f"c{len(self.constraints)}"
        self.constraints.append(Constraint(LinExpr(terms), sense, float(rhs - expr.constant), name))
        return len(self.constraints) - 1

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def var_index(self, name: str) -> int:
        if name not in self._names:
            self._names = {v.name: i for i, v in enumerate(self.variables)}
        return self._names[name]

    def count(self, tag: str | None = None, kind: str | None = None) -> int:
        return sum(1 for v in self.variables if (tag is None or v.tag == tag) and (kind is None or v.kind == kind))

    def binaries(self) -> list[int]:
        return [i for i, v in enumerate(self.variables) if v.kind == BINARY]

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def matrices(self):
        """Dense ``(c, A, senses, b)`` with ``c`` in the model's own sense."""
        n, m = self.n_vars, len(self.constraints)
        c = np.zeros(n)
        for v, coef in self.objective.terms.items():
            c[v] += coef
        A = np.zeros((m, n))
        b = np.zeros(m)
        senses = []
        for i, con in enumerate(self.constraints):
            for v, coef in con.expr.terms.items():
                A[i, v] += coef
            b[i] = con.rhs
            senses.append(con.sense)
        return c, A, senses, b

    def objective_value(self, x: Sequence[float]) -> float:
        return self.objective.value(x)

    def violation(self, x: Sequence[float]) -> float:
        """Largest bound, row, or integrality violation of an assignment."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for i, v in enumerate(self.variables):
            worst = max(worst, v.lb - x[i], x[i] - v.ub)
            if v.kind == BINARY:
                worst = max(worst, min(abs(x[i]), abs(1.0 - x[i])))
        for con in self.constraints:
            lhs = con.expr.value(x)
            if con.sense == LE:
                worst = max(worst, lhs - con.rhs)
            elif con.sense == GE:
                worst = max(worst, con.rhs - lhs)
            else:
                worst = max(worst, abs(lhs - con.rhs))
        return worst

    def integral_objective(self) -> bool:
        """Objective takes integer values on every integer-feasible point."""
        if self.objective.constant != round(self.objective.constant):
            return False
        for v, c in self.objective.terms.items():
            if c == 0.0:
                continue
            if self.variables[v].kind != BINARY or c != round(c):
                return False
        return True


# -- log-domain trees -------------------------------------------------------

@dataclass
class SignedLogTree:
    pruned: PrunedRCT
    sign: int
    leaf_logs: dict[int, float]

    @property
    def root(self) -> RCTNode:
        return self.pruned.root


def log_leaf_values(pruned: PrunedRCT, signal=None, eps_pred: float = DEFAULT_EPS_PRED) -> SignedLogTree:
    """Attach ``log |h(sigma(t))|`` to every surviving leaf, clamped below at ``log eps_pred``."""
    if pruned.root_sign == 0:
        raise EncodingError("sign-0 trees have no log-domain form")
    logs = {}
    for node in pruned.root.walk():
        if node.op == LEAF:
            mag = abs(node.value)
            logs[id(node)] = math.inf if math.isinf(mag) else math.log(max(mag, eps_pred))
    return SignedLogTree(pruned, pruned.root_sign, logs)


def magnitude_op(op: str, s: int) -> str:
    """The min/max applied to log-magnitudes for a node of sign ``s``."""
    if s > 0:
        return op
    return MAX if op == MIN else MIN


def log_domain_value(slt: SignedLogTree, logw: Mapping[str, float], record: dict | None = None) -> float:
    """Evaluate ``log |r|`` directly on the pruned tree; ``record`` gets per-node values."""

    def ev(node: RCTNode) -> float:
        if node.op == LEAF:
            y = slt.leaf_logs[id(node)]
        else:
            vals = [ev(c) + (0.0 if pid is None else logw[pid]) for c, pid in node.children]
            op = magnitude_op(node.op, slt.sign)
            if not vals:
                y = math.inf
            else:
                y = min(vals) if op == MIN else max(vals)
        if record is not None:
            record[id(node)] = y
        return y

    return ev(slt.root)


# -- gadgets ----------------------------------------------------------------

@dataclass
class EncodedNode:
    """A tree node's footprint in the model."""

    rct: RCTNode
    var: int | None = None
    const: float | None = None
    op: str | None = None
    kids: list[tuple[EncodedNode, int | None]] = field(default_factory=list)
    deltas: list[int] = field(default_factory=list)
    lo: float = 0.0
    hi: float = 0.0

    @property
    def infinite(self) -> bool:
        return self.const is not None and math.isinf(self.const)

    def expr(self) -> LinExpr:
        return LinExpr.of(constant=self.const) if self.var is None else LinExpr.of(self.var)

    def walk(self):
        yield self
        for kid, _ in self.kids:
            yield from kid.walk()


class TreeEncoder:
    """Registers one signed log tree's gadgets in a shared model."""

    def __init__(self, model: MILPModel, vvars: Mapping[str, int], v_bounds: tuple[float, float], label: str = ""):
        self.model = model
        self.vvars = vvars
        self.vlo, self.vhi = v_bounds
        self.label = label

    def encode(self, slt: SignedLogTree) -> EncodedNode:
        return self.encode_node(slt.root, slt.sign, slt.leaf_logs)

    def encode_node(self, node: RCTNode, s: int, leaf_logs: Mapping[int, float]) -> EncodedNode:
        if node.value is None or sign(node.value) == 0:
            raise EncodingError("sign-0 node reached the encoder; prune first")
        if sign(node.value) != s:
            raise EncodingError("node sign differs from tree sign; prune first")
        if node.op == LEAF:
            c = leaf_logs[id(node)]
            return EncodedNode(node, const=c, lo=c, hi=c)
        if math.isinf(node.value):
            return EncodedNode(node, const=math.inf, lo=math.inf, hi=math.inf)

        op = magnitude_op(node.op, s)
        operands = []  # (EncodedNode, vvar, expr, lo, hi)
        for child, pid in node.children:
            enc = self.encode_node(child, s, leaf_logs)
            if enc.infinite:
                # infinite operand never wins a min; a max would itself be infinite
                continue
            expr = enc.expr()
            lo, hi = enc.lo, enc.hi
            vv = None
            if pid is not None:
                vv = self.vvars[pid]
                expr.add(vv, 1.0)
                lo, hi = lo + self.vlo, hi + self.vhi
            operands.append((enc, vv, expr, lo, hi))
        if not operands:
            raise EncodingError("operator with no finite operand on a finite node")

        if op == MIN:
            y_lo, y_hi = min(o[3] for o in operands), min(o[4] for o in operands)
        else:
            y_lo, y_hi = max(o[3] for o in operands), max(o[4] for o in operands)
        m = self.model
        y = m.add_var("y", y_lo, y_hi, label=f"{self.label}:{node.label()}@{node.time}")
        out = EncodedNode(node, var=y, op=op, lo=y_lo, hi=y_hi)
        out.kids = [(o[0], o[1]) for o in operands]
        if len(operands) == 1:
            m.add_constraint(LinExpr.of(y) - operands[0][2], EQ, 0.0)
            return out

        for _, _, expr, _, _ in operands:
            m.add_constraint(LinExpr.of(y) - expr, LE if op == MIN else GE, 0.0)
        selectors = LinExpr()
        for _, _, expr, lo, hi in operands:
            d = m.add_var("d", 0, 1, BINARY, label=f"{self.label}:select")
            out.deltas.append(d)
            selectors.add(d, 1.0)
            if op == MIN:
                # y >= e - M (1 - d),  M = hi(e) - lo(y)
                big = max(hi - y_lo, 0.0)
                m.add_constraint(LinExpr.of(y) - expr + LinExpr.of(d, -big), GE, -big)
            else:
                # y <= e + M (1 - d),  M = hi(y) - lo(e)
                big = max(y_hi - lo, 0.0)
                m.add_constraint(LinExpr.of(y) - expr + LinExpr.of(d, big), LE, big)
            m.big_m = max(m.big_m, big)
        m.add_constraint(selectors, EQ, 1.0)
        return out


def encode_node(node: RCTNode, s: int, model: MILPModel, vvars, leaf_logs, v_bounds=(-DEFAULT_V_BOUND, DEFAULT_V_BOUND)) -> int | None:
    """Encode the subtree at ``node`` and return its value variable (None for a leaf)."""
    return TreeEncoder(model, vvars, v_bounds).encode_node(node, s, leaf_logs).var


def complete_node(enc: EncodedNode, logw: Mapping[int, float], x: np.ndarray) -> float:
    """Write exact ``y`` and selector values for fixed log-weights into ``x``."""
    if enc.var is None:
        return enc.const
    vals = [complete_node(kid, logw, x) + (0.0 if vv is None else logw[vv]) for kid, vv in enc.kids]
    pick = int(np.argmin(vals)) if enc.op == MIN else int(np.argmax(vals))
    y = vals[pick]
    x[enc.var] = y
    for i, d in enumerate(enc.deltas):
        x[d] = 1.0 if i == pick else 0.0
    return y


# -- datasets to problems ---------------------------------------------------

@dataclass
class SignalTree:
    sid: str
    rct: RCTNode
    pruned: PrunedRCT
    slt: SignedLogTree | None = None
    encoded: EncodedNode | None = None

    @property
    def sign(self) -> int:
        return self.pruned.root_sign

    @property
    def rho(self) -> float:
        return self.rct.value

    @property
    def constant(self) -> bool:
        return self.pruned.constant


@dataclass
class PairRecord:
    pair: PreferencePair
    status: str
    z: int | None = None
    sign: int = 0


def decide_pair(winner: SignalTree, loser: SignalTree) -> str:
    """Classify a preference into fixed outcomes or a decision pair."""
    sw, sl = winner.sign, loser.sign
    if sw != sl:
        return SATISFIED if sw > sl else VIOLATED
    if sw == 0:
        return VIOLATED  # both zero: a tie under every valuation
    if winner.constant or loser.constant:
        # same sign, at least one infinite: compare the fixed values
        return SATISFIED if winner.rho > loser.rho else VIOLATED
    return DECISION


def dataset_pairs(dataset) -> list[PreferencePair]:
    if isinstance(dataset, RankingDataset):
        return dataset.pairs()
    return list(dataset)


class SemanticObjective:
    """Direct-semantics scoring of valuations on a dataset (no MILP involved).

    Preferences and rankings score the number of pairs with
    ``label * (r1 - r2) > 0``. Demonstrations score the log-domain surrogate
    ``sum(sign * log|r|)`` over demos whose robustness is not constant, the
    same quantity the MILP maximizes.
    """

    def __init__(self, formula: FormulaNode, store: SignalStore, dataset, table: ParameterTable | None = None):
        if not is_pnf(formula):
            formula = to_pnf(formula)
        self.formula = formula
        self.mode = feedback_mode(dataset)
        self.dataset = dataset
        self.pairs = dataset_pairs(dataset) if self.mode != "demonstrations" else []
        self.demos = list(dataset.demos) if self.mode == "demonstrations" else []
        ids = list(dict.fromkeys([i for p in self.pairs for i in (p.left, p.right)] + self.demos))
        if not ids:
            raise EncodingError("empty dataset")
        missing = [i for i in ids if i not in store]
        if missing:
            raise EncodingError(f"unknown signal id(s): {missing}")
        self.store = store
        need = horizon(formula)
        for i in ids:
            if store[i].length < need:
                raise EncodingError(f"signal {i!r} has {store[i].length} samples; formula needs {need}")
        if table is None:
            table = collect_parameters(formula, max(store[i].length for i in ids))
        self.table = table
        self.trees: dict[str, SignalTree] = {}
        for i in ids:
            sig = store[i]
            rct = build_rct(formula, 0, sig.length, table)
            robustness(rct, sig)
            self.trees[i] = SignalTree(i, rct, prune(rct))

    def robustness_batch(self, weights: Mapping[str, np.ndarray], size: int) -> dict[str, np.ndarray]:
        return {
            sid: weighted_robustness_batch(tree.pruned.root, None, weights, size)
            for sid, tree in self.trees.items()
        }

    def score_batch(self, weights: Mapping[str, np.ndarray], size: int) -> np.ndarray:
        r = self.robustness_batch(weights, size)
        total = np.zeros(size)
        if self.mode == "demonstrations":
            for sid in self.demos:
                tree = self.trees[sid]
                if tree.constant:
                    continue
                total += tree.sign * np.log(np.abs(r[sid]))
            return total
        for p in self.pairs:
            total += r[p.winner] > r[p.loser]
        return total

    def score(self, valuation: Mapping[str, float]) -> float:
        weights = {pid: np.array([valuation.get(pid, 1.0)]) for pid in self.table}
        return float(self.score_batch(weights, 1)[0])

    def demo_robustness_sum(self, valuation: Mapping[str, float]) -> float:
        """The untransformed demonstration objective, sum of weighted robustness."""
        weights = {pid: np.array([valuation.get(pid, 1.0)]) for pid in self.table}
        r = self.robustness_batch(weights, 1)
        return float(sum(r[sid][0] for sid in self.demos))


@dataclass
class Problem:
    objective: SemanticObjective
    model: MILPModel
    vvars: dict[str, int]
    pairs: list[PairRecord]
    v_bound: float
    margin: float

    @property
    def mode(self) -> str:
        return self.objective.mode

    @property
    def table(self) -> ParameterTable:
        return self.objective.table

    @property
    def trees(self) -> dict[str, SignalTree]:
        return self.objective.trees

    def counts(self) -> dict[str, int]:
        out = {SATISFIED: 0, VIOLATED: 0, DECISION: 0}
        for p in self.pairs:
            out[p.status] += 1
        return out

    def complete(self, logw: Mapping[str, float]) -> np.ndarray:
        """Model assignment induced by log-weights (clipped to the box)."""
        x = np.zeros(self.model.n_vars)
        vals = {}
        for pid, vv in self.vvars.items():
            v = float(np.clip(logw.get(pid, 0.0), -self.v_bound, self.v_bound))
            x[vv] = v
            vals[vv] = v
        for tree in self.trees.values():
            if tree.encoded is not None:
                complete_node(tree.encoded, vals, x)
        for rec in self.pairs:
            if rec.z is None:
                continue
            w, l = self.trees[rec.pair.winner].encoded, self.trees[rec.pair.loser].encoded
            gap = (w.expr().value(x) - l.expr().value(x)) * rec.sign
            x[rec.z] = 1.0 if gap >= self.margin - 1e-9 else 0.0
        return x

    def logw_from_assignment(self, x: Sequence[float]) -> dict[str, float]:
        return {pid: float(x[vv]) for pid, vv in self.vvars.items()}

    def heuristic(self, x: Sequence[float]):
        """Round an LP point to a feasible incumbent via its log-weights."""
        full = self.complete(self.logw_from_assignment(x))
        return full, self.model.objective_value(full)


def build_problem(
    mode: str | None,
    dataset,
    formula: FormulaNode,
    store: SignalStore,
    v_bound: float = DEFAULT_V_BOUND,
    margin: float = DEFAULT_MARGIN,
    eps_pred: float = DEFAULT_EPS_PRED,
    table: ParameterTable | None = None,
) -> Problem:
    """Compile a feedback dataset into a log-domain MILP.

    Args:
        mode: "preferences", "ranking" or "demonstrations"; None infers it
            from the dataset type.
        dataset: list of :class:`PreferencePair`, a :class:`RankingDataset`,
            or a :class:`DemoDataset`.
        formula: the task formula (normalized to PNF here).
        store: signal id -> Signal.
        v_bound: log-weights are boxed to ``[-v_bound, v_bound]``.
        margin: log-domain gap required for a pair indicator to count.
    """
    found = feedback_mode(dataset)
    if mode is not None and mode != found:
        raise EncodingError(f"dataset holds {found}, mode {mode} requested")
    objective = SemanticObjective(formula, store, dataset, table)
    model = MILPModel()

    active: set[str] = set()
    for tree in objective.trees.values():
        if not tree.constant:
            active |= tree.pruned.active_params
    vvars = {pid: model.add_var("v", -v_bound, v_bound, label=pid) for pid in objective.table if pid in active}

    for sid, tree in objective.trees.items():
        if tree.constant:
            continue
        tree.slt = log_leaf_values(tree.pruned, eps_pred=eps_pred)
        tree.encoded = TreeEncoder(model, vvars, (-v_bound, v_bound), sid).encode(tree.slt)

    pairs: list[PairRecord] = []
    obj = LinExpr()
    if found == "demonstrations":
        for sid in objective.demos:
            tree = objective.trees[sid]
            if tree.constant:
                continue
            obj = obj + tree.encoded.expr().scaled(float(tree.sign))
    else:
        for p in objective.pairs:
            w, l = objective.trees[p.winner], objective.trees[p.loser]
            status = decide_pair(w, l)
            rec = PairRecord(p, status, sign=w.sign)
            if status == SATISFIED:
                obj.constant += 1.0
            elif status == DECISION:
                rec.z = model.add_var("z", 0, 1, BINARY, label=f"{p.left}>{p.right}" if p.label == 1 else f"{p.right}>{p.left}")
                ew, el = w.encoded, l.encoded
                # positive: z -> y_w - y_l >= margin; negative: z -> y_l - y_w >= margin
                gap = (ew.expr() - el.expr()).scaled(float(w.sign))
                gap_lo = (ew.lo - el.hi) if w.sign > 0 else (el.lo - ew.hi)
                big = max(margin - gap_lo, 0.0)
                model.add_constraint(gap + LinExpr.of(rec.z, -big), GE, margin - big)
                model.big_m = max(model.big_m, big)
                obj.add(rec.z, 1.0)
            pairs.append(rec)
    model.objective = obj
    return Problem(objective, model, vvars, pairs, v_bound, margin)
