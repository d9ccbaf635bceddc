"""Acceptance gate: one test per exit criterion.

Run ``pytest tests/test_acceptance.py`` (or ``python3 tests/test_acceptance.py``);
the terminal summary prints one PASS/FAIL line per criterion.
"""

import itertools
import math
import sys
import time

import numpy as np
import pytest

from helpers import enumerate_milp, random_formula, random_signal, random_store, realizable_instance, small_instance
from wstl.data import DemoDataset, PreferencePair, RankingDataset, fuel_corrected_lap_time
from wstl.encode import DECISION, SATISFIED, SemanticObjective, build_problem, decide_pair, log_domain_value, log_leaf_values
from wstl.evaluate import kendall_accuracy, pairwise_accuracy, scores
from wstl.fixtures import example1
from wstl.formula import Valuation, collect_parameters, horizon, parse, to_pnf
from wstl.learn import LearnConfig, learn
from wstl.pruning import prune
from wstl.rct import Signal, build_rct, robustness, weighted_robustness
from wstl.solve import OPTIMAL, solve_internal

@pytest.fixture
def criterion(record_property):
    def tag(number: int, text: str):
        record_property("criterion", f"{number:2d}. {text}")
    return tag


@pytest.fixture(scope="module")
def corpus(robot_corpus):
    """Learning runs on every corpus instance: robot files, the realizable ranking, random rankings and demos."""
    runs = []
    f, store, pds = robot_corpus
    for name in ("pd1", "pd2", "pd3"):
        runs.append((f"robot-{name}", learn(f, store, pds[name], LearnConfig(time_limit=60))))
    f, store, ranking, _, _ = realizable_instance()
    runs.append(("realizable", learn(f, store, ranking, LearnConfig(time_limit=60))))
    for seed in range(8):
        f, store = small_instance(100 + seed, 6, 3, 3)
        runs.append((f"ranking-{seed}", learn(f, store, RankingDataset(list(store)), LearnConfig(samples=300, time_limit=60))))
        runs.append((f"demos-{seed}", learn(f, store, DemoDataset(list(store)[:4]), LearnConfig(samples=300, time_limit=60))))
    return runs


def test_c01_worked_example(criterion):
    criterion(1, "worked example: rho = 2, node and leaf values, < 1 ms")
    f, sig = example1()
    g = to_pnf(f)
    timings = []
    for _ in range(30):
        t0 = time.perf_counter()
        tree = build_rct(g, 0, sig.length)
        rho = robustness(tree, sig)
        timings.append(time.perf_counter() - t0)
    assert rho == 2
    kids = [c for c, _ in tree.children]
    assert [c.value for c in kids] == [-1, 1, 2]
    assert [tuple(leaf.value for leaf, _ in c.children) for c in kids] == [(-1, 6), (4, 1), (2, 3)]
    assert min(timings) < 1e-3


def test_c02_pruning_preserves_robustness(criterion):
    criterion(2, "pruning: 500 formulas, exact rho, weighted within 1e-9, < 10 s")
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    for i in range(500):
        f = to_pnf(random_formula(rng, 4, 6))
        sig = random_signal(rng, horizon(f) + int(rng.integers(0, 3)), grid=0.5 if i % 2 else None)
        table = collect_parameters(f, sig.length)
        tree = build_rct(f, 0, sig.length, table)
        rho = robustness(tree, sig)
        pr = prune(tree)
        assert pr.value == rho
        assert robustness(pr.root, sig) == rho
        for _ in range(10):
            w = {p: float(np.exp(rng.uniform(-2, 2))) for p in table}
            a, b = weighted_robustness(tree, sig, w), weighted_robustness(pr.root, None, w)
            assert a == b or math.isclose(a, b, rel_tol=1e-9)
    assert time.perf_counter() - t0 < 10


def test_c03_log_transform_round_trip(criterion):
    criterion(3, "log transform: 200 cases per sign, sign*exp(y) = r within 1e-9")
    rng = np.random.default_rng(3)
    done = {1: 0, -1: 0}
    while min(done.values()) < 200:
        f = to_pnf(random_formula(rng, 3, 4))
        sig = random_signal(rng, horizon(f))
        table = collect_parameters(f, sig.length)
        tree = build_rct(f, 0, sig.length, table)
        robustness(tree, sig)
        pr = prune(tree)
        if pr.constant or done[pr.root_sign] >= 200:
            continue
        slt = log_leaf_values(pr, eps_pred=1e-300)
        logw = {p: float(rng.uniform(-3, 3)) for p in table}
        direct = weighted_robustness(pr.root, None, {p: math.exp(v) for p, v in logw.items()})
        assert math.isclose(pr.root_sign * math.exp(log_domain_value(slt, logw)), direct, rel_tol=1e-9)
        done[pr.root_sign] += 1


GRID_FORMULAS = [
    "F[0,2] x >= {a}",
    "F[0,4] x >= {a}",
    "F[0,1] x >= {a} & y >= {b}",
    "G[0,1] x >= {a} | y <= {b}",
    "(x >= {a} & y >= {b}) | x <= {c}",
    "F[0,1](x >= {a} & y >= {b})",
    "x >= {a} U[0,1] y >= {b}",
    "G[0,1](x >= {a} | y >= {b})",
]


def test_c04_grid_argmax_sets_coincide(criterion):
    criterion(4, "grid oracle: argmax of original = argmax of log-domain objective, < 30 s")
    rng = np.random.default_rng(4)
    t0 = time.perf_counter()
    nontrivial = 0
    for k in range(40):
        template = GRID_FORMULAS[k % len(GRID_FORMULAS)]
        a, b, c = np.round(rng.uniform(-0.5, 0.5, 3), 2)
        f = to_pnf(parse(template.format(a=a, b=b, c=c)))
        store = random_store(rng, 6, horizon(f) + 1)
        prefs = [PreferencePair(u, v, int(rng.choice([-1, 1]))) for u, v in itertools.combinations(store, 2)]
        obj = SemanticObjective(f, store, prefs)
        table = obj.table
        assert len(table) <= 5
        trees = obj.trees
        slts = {sid: log_leaf_values(t.pruned, eps_pred=1e-300) for sid, t in trees.items() if not t.constant}
        status = [decide_pair(trees[p.winner], trees[p.loser]) for p in prefs]
        original, logdomain = {}, {}
        for point in itertools.product((-1.0, 0.0, 1.0), repeat=len(table)):
            logw = dict(zip(table.ids, point))
            w = {p: math.exp(v) for p, v in logw.items()}
            r = {sid: weighted_robustness(t.rct, None, w) for sid, t in trees.items()}
            original[point] = sum(r[p.winner] > r[p.loser] for p in prefs)
            y = {sid: log_domain_value(s, logw) for sid, s in slts.items()}
            total = 0
            for p, st in zip(prefs, status):
                if st == SATISFIED:
                    total += 1
                elif st == DECISION:
                    sgn = trees[p.winner].sign
                    total += sgn * (y[p.winner] - y[p.loser]) > 0
            logdomain[point] = total
        best_o, best_l = max(original.values()), max(logdomain.values())
        arg_o = {p for p, v in original.items() if v == best_o}
        arg_l = {p for p, v in logdomain.items() if v == best_l}
        assert arg_o == arg_l, template
        nontrivial += len(arg_o) < len(original)
    assert nontrivial >= 10
    assert time.perf_counter() - t0 < 30


def test_c05_milp_recount(criterion, corpus):
    criterion(5, "MILP soundness: objective = recount, per-node |sign*exp(y) - r| <= 1e-6")
    checked = 0
    for name, res in corpus:
        if res.status != OPTIMAL:
            continue
        checked += 1
        rep = res.report
        if res.problem.model.integral_objective():
            assert res.objective == rep["solver_objective"] == rep["recounted_objective"], name
        else:
            assert math.isclose(rep["solver_objective"], rep["recounted_objective"], rel_tol=1e-9, abs_tol=1e-9), name
        x = res.solution.x
        for tree in res.problem.trees.values():
            if tree.encoded is None:
                continue
            for enc in tree.encoded.walk():
                if enc.var is None:
                    continue
                direct = weighted_robustness(enc.rct, None, res.valuation)
                assert abs(tree.sign * math.exp(x[enc.var]) - direct) <= 1e-6, name
    assert checked >= len(corpus) - 2


def test_c06_internal_solver_matches_enumeration(criterion):
    criterion(6, "internal solver = enumeration on 20 models with <= 12 binaries, < 60 s")
    t0 = time.perf_counter()
    models, seed = [], 0
    while len(models) < 20:
        seed += 1
        f, store = small_instance(seed, 3 + seed % 2, 2, 2)
        rng = np.random.default_rng(seed)
        if seed % 2:
            data = RankingDataset(list(store))
        else:
            data = [PreferencePair(u, v, int(rng.choice([-1, 1]))) for u, v in itertools.combinations(store, 2)]
        model = build_problem(None, data, f, store).model
        if 1 <= len(model.binaries()) <= 12:
            models.append(model)
    for model in models:
        sol = solve_internal(model)
        assert sol.status == OPTIMAL
        assert sol.objective == enumerate_milp(model)
    assert time.perf_counter() - t0 < 60


def test_c07_realizable_recovery(criterion):
    criterion(7, "realizable recovery: 8 signals, 28 pairs, 100% training accuracy, < 60 s")
    f, store, ranking, truth, sc = realizable_instance()
    assert f.depth() == 3 and len(ranking.pairs()) == 28
    t0 = time.perf_counter()
    res = learn(f, store, ranking, LearnConfig(time_limit=60))
    wall = time.perf_counter() - t0
    rep = pairwise_accuracy(res.valuation, f, ranking.pairs(), store)
    assert rep.accuracy == 1.0
    assert wall < 60


def test_c08_warm_start_dominance(criterion, corpus):
    criterion(8, "warm-start dominance: MILP objective >= RS objective on every corpus instance")
    for name, res in corpus:
        assert res.objective >= res.rs_objective, name


def test_c09_preference_flip(criterion, robot_corpus):
    criterion(9, "preference flip: PD2 changes the flipped pair, PD3 reverses every pair")
    f, store, pds = robot_corpus
    learned = {k: learn(f, store, v).valuation for k, v in pds.items()}
    ids = list(store)
    r = {k: {sid: s[1] for sid, s in scores(val, f, store, ids).items()} for k, val in learned.items()}
    flipped = [i for i, (a, b) in enumerate(zip(pds["pd1"], pds["pd2"])) if a.label != b.label]
    assert len(flipped) == 1
    p = pds["pd1"][flipped[0]]
    assert (r["pd1"][p.left] > r["pd1"][p.right]) != (r["pd2"][p.left] > r["pd2"][p.right])
    obj = SemanticObjective(f, store, pds["pd1"])
    for p in pds["pd1"]:
        if decide_pair(obj.trees[p.left], obj.trees[p.right]) != DECISION:
            continue
        assert (r["pd1"][p.left] > r["pd1"][p.right]) != (r["pd3"][p.left] > r["pd3"][p.right])


def test_c10_fuel_correction(criterion):
    criterion(10, "fuel correction: 87.195 reference, affine in t_raw, t_pit and lap")
    assert fuel_corrected_lap_time(90, 10, 1.5, 0) == 87.195
    base = fuel_corrected_lap_time(90, 10, 1.5, 0)
    assert math.isclose(fuel_corrected_lap_time(91, 10, 1.5, 0) - base, 1.0)
    assert math.isclose(fuel_corrected_lap_time(90, 10, 1.5, 2) - base, -2.0)
    assert math.isclose(fuel_corrected_lap_time(90, 11, 1.5, 0) - base, 1.5 * 0.033)


def test_c11_kendall_metrics(criterion):
    criterion(11, "Kendall metrics: adjacent swap 1/3, reversal 1, pairwise = Kendall")
    f = parse("x >= 0")
    ones = Valuation({})
    store = {k: Signal.single([v], name=k) for k, v in {"a": 2.0, "b": 3.0, "c": 1.0}.items()}
    assert kendall_accuracy(ones, f, ["a", "b", "c"], store).discordant_fraction == pytest.approx(1 / 3)
    assert kendall_accuracy(ones, f, ["c", "a", "b"], store).discordant_fraction == 1.0
    ranking = RankingDataset(("a", "b", "c"))
    assert pairwise_accuracy(ones, f, ranking.pairs(), store) == kendall_accuracy(ones, f, ranking, store)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
