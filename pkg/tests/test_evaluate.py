import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wstl.data import RankingDataset
from wstl.evaluate import (
    kendall_accuracy,
    mean_std,
    order_agreement,
    pairwise_accuracy,
    prefix_curve,
    prefix_prediction,
    read_curve_csv,
    scores,
    induced_ranking,
    write_curve_csv,
)
from wstl.formula import Valuation, collect_parameters, parse, to_pnf
from wstl.rct import Signal

ATOM = parse("x >= 0")
ONES = Valuation({})


def store_of(values):
    return {sid: Signal.single([v], name=sid) for sid, v in values.items()}


class TestKendall:
    def test_adjacent_swap(self):
        store = store_of({"a": 2.0, "b": 3.0, "c": 1.0})
        rep = kendall_accuracy(ONES, ATOM, ["a", "b", "c"], store)
        assert rep.discordant_fraction == pytest.approx(1 / 3)
        assert rep.total == 3

    def test_full_reversal(self):
        store = store_of({"a": 1.0, "b": 2.0, "c": 3.0, "d": 4.0})
        assert kendall_accuracy(ONES, ATOM, ["a", "b", "c", "d"], store).discordant_fraction == 1.0

    def test_ties_count_against(self):
        store = store_of({"a": 1.0, "b": 1.0})
        assert kendall_accuracy(ONES, ATOM, ["a", "b"], store).accuracy == 0.0

    def test_constant_pairs_reported(self):
        store = store_of({"a": 1.0, "b": -1.0, "c": 0.5})
        rep = kendall_accuracy(ONES, ATOM, ["a", "c", "b"], store)
        assert rep.constant_pairs == 2 and rep.accuracy == 1.0

    @given(st.permutations(range(6)), st.lists(st.floats(-5, 5), min_size=6, max_size=6))
    @settings(max_examples=100, deadline=None)
    def test_pairwise_on_expansion_equals_kendall(self, perm, vals):
        store = store_of({f"s{i}": v for i, v in enumerate(vals)})
        ranking = RankingDataset([f"s{i}" for i in perm])
        k = kendall_accuracy(ONES, ATOM, ranking, store)
        p = pairwise_accuracy(ONES, ATOM, ranking.pairs(), store)
        assert k == p

    def test_needs_two_items(self):
        with pytest.raises(ValueError):
            kendall_accuracy(ONES, ATOM, ["a"], store_of({"a": 1.0}))


class TestOrders:
    @pytest.mark.parametrize(
        "pred, acc",
        [(["a", "b", "c"], 1.0), (["b", "a", "c"], 2 / 3), (["c", "b", "a"], 0.0)],
    )
    def test_order_agreement(self, pred, acc):
        assert order_agreement(["a", "b", "c"], pred).accuracy == pytest.approx(acc)

    def test_induced_ranking_is_stable(self):
        assert induced_ranking({"a": (0, 1.0), "b": (0, 2.0), "c": (0, 1.0)}) == ["b", "a", "c"]

    def test_weights_change_scores(self):
        f = to_pnf(parse("x >= 0 & y >= 0"))
        store = {"s": Signal({"x": [1.0], "y": [2.0]})}
        assert scores({"w0": 3.0, "w1": 1.0}, f, store, ["s"])["s"] == (1.0, 2.0)


class TestPrefix:
    @pytest.fixture
    def setup(self):
        rng = np.random.default_rng(4)
        f = to_pnf(parse("F[0,3] x >= 0.5"))
        store = {f"s{i}": Signal.single(rng.uniform(0, 1, 6), name=f"s{i}") for i in range(5)}
        table = collect_parameters(f, 6)
        val = Valuation({p: float(np.exp(rng.uniform(-1, 1))) for p in table})
        truth = induced_ranking(scores(val, f, store, list(store), table))
        return f, store, table, val, truth

    def test_full_prefix_recovers_final_order(self, setup):
        f, store, table, val, truth = setup
        assert prefix_prediction(val, f, store, truth, 6, table) == truth

    def test_short_prefixes_run(self, setup):
        f, store, table, val, truth = setup
        rows = prefix_curve(val, f, store, truth, range(1, 7), table)
        assert [k for k, _ in rows] == list(range(1, 7))
        assert rows[-1][1] == 1.0
        assert all(0.0 <= a <= 1.0 for _, a in rows)

    def test_rejects_zero(self, setup):
        f, store, table, val, truth = setup
        with pytest.raises(ValueError):
            prefix_prediction(val, f, store, truth, 0, table)

    def test_curve_csv(self, tmp_path):
        rows = [(1, 0.5), (2, 0.75)]
        text = write_curve_csv(rows, tmp_path / "c.csv")
        assert text.splitlines()[0] == "K,accuracy"
        assert read_curve_csv(tmp_path / "c.csv") == rows


def test_mean_std():
    assert mean_std([1.0, 3.0]) == (2.0, 1.0)


def test_all_permutations_bounded():
    store = store_of({"a": 1.0, "b": 2.0, "c": 3.0})
    fracs = sorted(kendall_accuracy(ONES, ATOM, list(p), store).discordant_fraction for p in itertools.permutations("abc"))
    assert fracs[0] == 0.0 and fracs[-1] == 1.0
