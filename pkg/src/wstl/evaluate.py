"""Scoring learned valuations: pairwise accuracy, Kendall accuracy, prefix prediction."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from itertools import combinations
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .data import PreferencePair, RankingDataset, SignalStore
from .formula import FormulaNode, ParameterTable, collect_parameters, horizon, is_pnf, shrink_intervals, to_pnf
from .rct import build_rct, robustness, weighted_robustness


@dataclass
class EvalReport:
    concordant: int
    discordant: int
    constant_pairs: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.concordant / self.total if self.total else math.nan

    @property
    def discordant_fraction(self) -> float:
        return self.discordant / self.total if self.total else math.nan

    def to_dict(self) -> dict:
        out = asdict(self)
        out["accuracy"] = self.accuracy
        out["discordant_fraction"] = self.discordant_fraction
        return out


def _pnf(formula: FormulaNode) -> FormulaNode:
    return formula if is_pnf(formula) else to_pnf(formula)


def scores(
    valuation: Mapping[str, float],
    formula: FormulaNode,
    store: SignalStore,
    ids: Iterable[str],
    table: ParameterTable | None = None,
    clamp: bool = False,
) -> dict[str, tuple[float, float]]:
    """``id -> (rho, r)``: classical and weighted robustness at time 0."""
    f = _pnf(formula)
    ids = list(dict.fromkeys(ids))
    if table is None:
        table = collect_parameters(f, max(store[i].length for i in ids))
    out = {}
    for i in ids:
        sig = store[i]
        tree = build_rct(f, 0, sig.length, table, clamp_offsets=clamp)
        rho = robustness(tree, sig)
        out[i] = (rho, weighted_robustness(tree, sig, valuation))
    return out


def _fixed(rho_a: float, rho_b: float) -> bool:
    """The pair's order is the same under every valuation."""
    sa, sb = np.sign(rho_a), np.sign(rho_b)
    return sa != sb or sa == 0 or math.isinf(rho_a) or math.isinf(rho_b)


def _judge(pairs: Sequence[PreferencePair], sc: Mapping[str, tuple[float, float]]) -> EvalReport:
    conc = disc = const = 0
    for p in pairs:
        (rho_w, r_w), (rho_l, r_l) = sc[p.winner], sc[p.loser]
        if r_w > r_l:
            conc += 1
        else:
            disc += 1  # ties count against
        const += _fixed(rho_w, rho_l)
    return EvalReport(conc, disc, const, len(pairs))


def pairwise_accuracy(valuation, formula, pairs: Sequence[PreferencePair], store: SignalStore, table=None) -> EvalReport:
    pairs = list(pairs)
    sc = scores(valuation, formula, store, [i for p in pairs for i in (p.left, p.right)], table)
    return _judge(pairs, sc)


def kendall_accuracy(valuation, formula, ranking: RankingDataset | Sequence[str], store: SignalStore, table=None) -> EvalReport:
    """Compare a best-first ground-truth order with the order induced by weighted robustness."""
    ordered = list(ranking.ordered if isinstance(ranking, RankingDataset) else ranking)
    if len(ordered) < 2:
        raise ValueError("a ranking needs at least two items")
    sc = scores(valuation, formula, store, ordered, table)
    return _judge([PreferencePair(a, b, 1) for a, b in combinations(ordered, 2)], sc)


def order_agreement(truth: Sequence[str], predicted: Sequence[str]) -> EvalReport:
    """Kendall comparison of two orderings of the same items."""
    pos = {sid: k for k, sid in enumerate(predicted)}
    conc = sum(1 for a, b in combinations(truth, 2) if pos[a] < pos[b])
    total = math.comb(len(truth), 2)
    return EvalReport(conc, total - conc, 0, total)


def induced_ranking(sc: Mapping[str, tuple[float, float]]) -> list[str]:
    """Ids by weighted robustness, best first; ties keep input order."""
    ids = list(sc)
    return sorted(ids, key=lambda i: -sc[i][1])


def prefix_prediction(
    valuation,
    formula: FormulaNode,
    store: SignalStore,
    ids: Sequence[str],
    k: int,
    table: ParameterTable | None = None,
) -> list[str]:
    """Ranking predicted from the first ``k`` samples of every signal.

    Intervals are clipped to ``k - 1``; offsets that vanish from the
    parameter table snap to the nearest learned one. A signal still shorter
    than the clipped formula's horizon holds its last sample.
    """
    if k < 1:
        raise ValueError("K must be at least 1")
    f = _pnf(formula)
    ids = list(ids)
    if table is None:
        table = collect_parameters(f, max(store[i].length for i in ids))
    short = shrink_intervals(f, k)
    need = horizon(short)
    view = {}
    for i in ids:
        sig = store[i].truncate(min(k, store[i].length))
        view[i] = sig.hold_extend(need)
    sc = scores(valuation, short, view, ids, table, clamp=True)
    return induced_ranking(sc)


def prefix_curve(
    valuation,
    formula: FormulaNode,
    store: SignalStore,
    truth: Sequence[str],
    ks: Iterable[int],
    table: ParameterTable | None = None,
) -> list[tuple[int, float]]:
    """``(K, accuracy)`` of prefix predictions against the final order."""
    rows = []
    for k in ks:
        pred = prefix_prediction(valuation, formula, store, truth, k, table)
        rows.append((k, order_agreement(truth, pred).accuracy))
    return rows


def write_curve_csv(rows: Sequence[tuple[int, float]], path: str | Path | None = None) -> str:
    lines = ["K,accuracy"] + [f"{k},{acc:.10g}" for k, acc in rows]
    text = "\n".join(lines) + "\n"
    if path is not None:
        Path(path).write_text(text, encoding="utf-8")
    return text


def mean_std(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    return float(arr.mean()), float(arr.std())


def read_curve_csv(path: str | Path) -> list[tuple[int, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [(int(r["K"]), float(r["accuracy"])) for r in csv.DictReader(fh)]
