import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import random_formula, random_signal
from wstl.fixtures import example1
from wstl.formula import collect_parameters, horizon, parse, to_pnf
from wstl.pruning import UncachedTreeError, prune, sign, zero_sign_policy
from wstl.rct import LEAF, Signal, build_rct, robustness, weighted_robustness


def evaluated(text_or_formula, values):
    f = to_pnf(parse(text_or_formula)) if isinstance(text_or_formula, str) else text_or_formula
    sig = Signal.single(values) if not isinstance(values, Signal) else values
    tree = build_rct(f, 0, sig.length)
    robustness(tree, sig)
    return tree, sig


class TestPrune:
    def test_worked_example(self):
        f, sig = example1()
        tree, _ = evaluated(to_pnf(f), sig)
        pr = prune(tree)
        assert pr.root_sign == 1
        # t=3 subtree is negative; at t=4 and t=5 every leaf is positive
        assert pr.active_params == {"w1", "w2", "w3", "w4"}
        assert pr.deleted == 3
        assert pr.kept == tree.size() - 3

    def test_input_untouched(self):
        tree, _ = evaluated("F[0,2] x >= 0", [1.0, -1.0, 2.0])
        before = tree.size()
        prune(tree)
        assert tree.size() == before

    def test_uncached_tree(self):
        tree = build_rct(to_pnf(parse("x >= 0")), 0, 1)
        with pytest.raises(UncachedTreeError):
            prune(tree)

    def test_zero_root(self):
        tree, _ = evaluated("F[0,1] x >= 0", [0.0, -1.0])
        pr = prune(tree)
        assert zero_sign_policy(tree) and pr.constant and pr.root_sign == 0

    def test_infinite_root_is_constant(self):
        tree, _ = evaluated("true | x >= 0", [1.0])
        assert prune(tree).constant

    @pytest.mark.parametrize("x, s", [(2.0, 1), (-0.5, -1), (0.0, 0)])
    def test_sign(self, x, s):
        assert sign(x) == s


@given(st.integers(0, 100_000))
@settings(max_examples=200, deadline=None)
def test_pruned_nodes_share_root_sign(seed):
    rng = np.random.default_rng(seed)
    f = to_pnf(random_formula(rng, 4, 4))
    sig = random_signal(rng, horizon(f) + 1, grid=0.5)
    tree, _ = evaluated(f, sig)
    pr = prune(tree)
    if pr.root_sign == 0:
        return
    for node in pr.root.walk():
        assert sign(node.value) == pr.root_sign
    # min/max over survivors still yields each node's value
    for node in pr.root.walk():
        if node.op == LEAF or not node.children:
            continue
        vals = [c.value for c, _ in node.children]
        assert node.value == (min(vals) if node.op == "min" else max(vals))


@given(st.integers(0, 100_000))
@settings(max_examples=150, deadline=None)
def test_pruning_preserves_weighted_robustness(seed):
    rng = np.random.default_rng(seed)
    f = to_pnf(random_formula(rng, 4, 4))
    sig = random_signal(rng, horizon(f))
    table = collect_parameters(f, sig.length)
    tree, _ = evaluated(f, sig)
    pr = prune(tree)
    assert pr.root.value == tree.value
    for _ in range(5):
        w = {p: float(np.exp(rng.uniform(-2, 2))) for p in table}
        a, b = weighted_robustness(tree, sig, w), weighted_robustness(pr.root, None, w)
        assert a == b or math.isclose(a, b, rel_tol=1e-9)
