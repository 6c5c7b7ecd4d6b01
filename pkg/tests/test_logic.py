from fractions import Fraction as F

import pytest

from models.errors import FormulaSyntaxError
from models.formulas import Formula
from services.bisimulation import bisimilarity_partition
from services.fixpoint import iterate
from services.logic import depth, interpret, logical_lower_bound, parse_formula, random_formula
from tests.conftest import random_pts


@pytest.mark.parametrize("text", [
    "<> true & ! <> <> true - 1/2",
    "! (true & true)",
    "<> (<> true - 1/3)",
    "true",
])
def test_rendering_parses_back(text):
    assert str(parse_formula(text)) == text


@pytest.mark.parametrize("text, column", [
    ("<> & true", 4),
    ("true $", 6),
    ("true )", 6),
    ("(true", 6),
])
def test_syntax_errors_report_column(text, column):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert str(info.value).startswith(f"column {column}:")


def test_constant_must_be_in_unit_interval():
    with pytest.raises(FormulaSyntaxError, match="outside"):
        parse_formula("true - 2")


def test_interpretation_on_example(ex1):
    values = interpret(ex1, parse_formula("<> <> true"), F(1))
    assert values[1] == F(4, 5)
    assert interpret(ex1, parse_formula("<> true"), F(1)).values == (1, 1, 1, 0, 1)
    assert interpret(ex1, parse_formula("! true - 1/2"), F(1)).values == (0,) * 5
    discounted = interpret(ex1, parse_formula("<> true"), F(1, 2))
    assert discounted[0] == F(1, 2)


def test_depth():
    assert depth(parse_formula("<> true & ! <> <> true - 1/2")) == 2
    assert depth(Formula.true()) == 0


def test_lower_bound_needs_formulas(ex1):
    with pytest.raises(ValueError):
        logical_lower_bound(ex1, [], 0, 1, F(1))
    formulas = [parse_formula("<> <> true"), parse_formula("<> true")]
    assert logical_lower_bound(ex1, formulas, 0, 1, F(1)) == F(1, 5)


def test_random_formulas_are_deterministic():
    assert random_formula(5, 3) == random_formula(5, 3)
    assert all(depth(random_formula(seed, 2)) <= 2 for seed in range(50))


@pytest.mark.parametrize("seed", range(40))
def test_depth_bounded_formulas_never_exceed_iterates(ex1, seed):
    formula = random_formula(seed, 3)
    d = iterate(ex1, F(1), depth(formula))
    values = interpret(ex1, formula, F(1))
    for i, j in d.pairs():
        assert abs(values[i] - values[j]) <= d[i, j]


@pytest.mark.parametrize("seed", range(30))
def test_double_negation_changes_nothing(ex1, seed):
    formula = random_formula(seed, 3)
    for delta in (F(1), F(1, 2)):
        assert interpret(ex1, Formula.neg(Formula.neg(formula)), delta) == interpret(ex1, formula, delta)


@pytest.mark.parametrize("seed", range(10))
def test_bisimilar_states_agree_on_every_formula(seed):
    pts = random_pts(seed + 200)
    blocks = bisimilarity_partition(pts).blocks
    for k in range(20):
        values = interpret(pts, random_formula(seed * 100 + k, 3), F(1))
        for block in blocks:
            assert len({values[s] for s in block}) == 1
