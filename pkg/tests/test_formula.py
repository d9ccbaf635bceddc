import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import oracle_robustness, random_formula, random_signal
from wstl.formula import (
    FormulaSyntaxError,
    Kind,
    Valuation,
    collect_parameters,
    horizon,
    is_pnf,
    parse,
    shrink_intervals,
    to_pnf,
    to_string,
)
from wstl.rct import formula_robustness


class TestParse:
    @pytest.mark.parametrize(
        "text, kind",
        [
            ("x >= 0", Kind.PRED),
            ("!x >= 0", Kind.NOT),
            ("x >= 0 & y <= 1", Kind.AND),
            ("x >= 0 | y <= 1", Kind.OR),
            ("x >= 0 -> y <= 1", Kind.IMPLIES),
            ("F[0,3] x >= 0", Kind.EVENTUALLY),
            ("G[1,2] x >= 0", Kind.ALWAYS),
            ("x >= 0 U[0,2] y >= 0", Kind.UNTIL),
            ("x >= 0 R[0,2] y >= 0", Kind.RELEASE),
            ("(x, y) in [7,9]x[1,3]", Kind.IN),
            ("true", Kind.TRUE),
            ("false", Kind.FALSE),
        ],
    )
    def test_root_kind(self, text, kind):
        assert parse(text).kind is kind

    def test_precedence(self):
        f = parse("a >= 0 | b >= 0 & c >= 0 -> d >= 0")
        assert f.kind is Kind.IMPLIES
        assert f.children[0].kind is Kind.OR
        assert f.children[0].children[1].kind is Kind.AND

    def test_affine_terms_are_collected(self):
        f = parse("2*x - 0.5*y + 1 <= 3")
        assert to_string(f) == "2*x - 0.5*y <= 2"

    def test_unicode_aliases(self):
        assert parse("¬ x >= 0 ∧ y >= 0") == parse("!x >= 0 & y >= 0")

    @pytest.mark.parametrize(
        "text, pos",
        [("F[3,2] x >= 0", 1), ("x >= ", 5), ("F[0,1.5] x >= 0", 4), ("x >= 0 )", 7)],
    )
    def test_syntax_errors_carry_position(self, text, pos):
        with pytest.raises(FormulaSyntaxError) as exc:
            parse(text)
        assert exc.value.position == pos

    @given(st.integers(0, 10_000))
    @settings(max_examples=150, deadline=None)
    def test_print_parse_roundtrip(self, seed):
        f = random_formula(np.random.default_rng(seed), 4)
        assert parse(to_string(f)) == f


class TestNormalForm:
    def test_example_formula(self):
        f = to_pnf(parse("F[3,5](x >= 0 & x <= 5)"))
        assert to_string(f) == "F[3,5] (x >= 0 & -x >= -5)"
        assert is_pnf(f)

    def test_box_expands_to_conjunction(self):
        f = to_pnf(parse("(x, y) in [7,9]x[1,3]"))
        assert to_string(f) == "(x >= 7 & -x >= -9) & (y >= 1 & -y >= -3)"

    def test_negation_dualizes_operators(self):
        f = to_pnf(parse("!(F[0,2] x >= 0 & y >= 0 U[0,1] x >= 1)"))
        assert f.kind is Kind.OR
        assert f.children[0].kind is Kind.ALWAYS
        assert f.children[1].kind is Kind.RELEASE

    @given(st.integers(0, 10_000))
    @settings(max_examples=200, deadline=None)
    def test_pnf_preserves_robustness(self, seed):
        rng = np.random.default_rng(seed)
        f = random_formula(rng, 3, 3)
        sig = random_signal(rng, horizon(to_pnf(f)) + 2)
        g = to_pnf(f)
        assert is_pnf(g)
        assert formula_robustness(g, sig) == pytest.approx(oracle_robustness(f, sig), abs=1e-12)


class TestHorizonAndParameters:
    @pytest.mark.parametrize(
        "text, h",
        [("x >= 0", 1), ("F[3,5] x >= 0", 6), ("G[0,2](x>=0) U[1,3] y>=0", 6), ("F[0,2] G[0,2] x >= 0", 5), ("F x >= 0", 1)],
    )
    def test_horizon(self, text, h):
        assert horizon(to_pnf(parse(text))) == h

    def test_example_parameters(self):
        table = collect_parameters(to_pnf(parse("F[3,5](x >= 0 & x <= 5)")), 6)
        assert table.ids == ["w0", "w1", "w2", "w3", "w4"]
        assert [table.entries[p].offset for p in table.ids[:3]] == [3, 4, 5]
        assert [table.entries[p].role for p in table.ids[3:]] == ["conjunct-1", "conjunct-2"]

    def test_until_has_two_weights_per_offset(self):
        table = collect_parameters(to_pnf(parse("x >= 0 U[0,2] y >= 0")))
        assert len(table) == 6

    def test_unbounded_interval_needs_length(self):
        f = to_pnf(parse("F x >= 0"))
        with pytest.raises(ValueError):
            collect_parameters(f)
        assert len(collect_parameters(f, 6)) == 6

    def test_clamped_lookup(self):
        table = collect_parameters(to_pnf(parse("F[3,5] x >= 0")))
        assert table.lookup((), "offset", 9, clamp=True) == table.lookup((), "offset", 5)
        with pytest.raises(KeyError):
            table.lookup((), "offset", 9)

    def test_shrink_intervals(self):
        f = shrink_intervals(to_pnf(parse("F[3,5] G[0,4] x >= 0")), 4)
        assert f.interval == (3, 3)
        assert f.children[0].interval == (0, 3)


class TestValuation:
    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            Valuation({"w0": 0.0})
        with pytest.raises(ValueError):
            Valuation({"w0": math.inf})

    def test_log_and_ones(self):
        table = collect_parameters(to_pnf(parse("x >= 0 & y >= 0")))
        assert Valuation.ones(table).log() == {"w0": 0.0, "w1": 0.0}
        assert Valuation({"w0": math.e}).log()["w0"] == pytest.approx(1.0)
