from fractions import Fraction as F

import pytest

from models.schemas import DeltaCase, DistanceMatrix
from services.kantorovich import (
    DeltaEvaluator,
    apply_delta,
    apply_delta_with_witnesses,
    delta_dual,
    delta_primal,
)
from services.transport import transport_min
from services.validation import validate_pseudometric
from tests.conftest import random_pseudometric, random_pts


def test_cases(ex1):
    d = DistanceMatrix.bottom(5)
    assert delta_dual(ex1, d, 0, 3, F(1, 2)).case == DeltaCase.MIXED
    assert delta_dual(ex1, d, 0, 3, F(1, 2)).value == F(1, 2)
    assert delta_dual(ex1, d, 3, 3, F(1)).value == 0
    assert delta_dual(ex1, d, 0, 1, F(1)).case == DeltaCase.BOTH_LIVE


def test_second_iterate_of_example(ex1):
    d1 = apply_delta(ex1, DistanceMatrix.top(5), F(1))
    assert d1[0, 1] == 0
    assert d1[1, 3] == 1
    d2 = apply_delta(ex1, d1, F(1))
    assert d2[0, 1] == F(1, 5)


def test_witnesses_attain_the_value(ex1):
    d = random_pseudometric(7, 5)
    dual = delta_dual(ex1, d, 0, 1, F(1))
    assert dual.coupling.cost(d.values) == dual.value
    primal = delta_primal(ex1, d, 0, 1, F(1))
    f = primal.witness
    assert all(0 <= v <= 1 for v in f)
    assert all(f[s] - f[t] <= d[s, t] for s in range(5) for t in range(5))
    assert sum((f[s] * (ex1.pi[0][s] - ex1.pi[1][s]) for s in range(5)), F(0)) == primal.value


def test_monotone_in_the_metric(ex1):
    small = random_pseudometric(3, 5)
    large = DistanceMatrix.bottom(5)
    assert small.leq(large)
    assert apply_delta(ex1, small, F(1)).leq(apply_delta(ex1, large, F(1)))


@pytest.mark.slow
def test_process_pool_matches_serial(ex1):
    d = random_pseudometric(11, 5)
    assert apply_delta(ex1, d, F(1), workers=2) == apply_delta(ex1, d, F(1))


def test_restricted_pairs(ex1):
    values = apply_delta_with_witnesses(ex1, DistanceMatrix.top(5), F(1), pairs=[(0, 3)])
    assert list(values) == [(0, 3)]


@pytest.mark.parametrize("seed", range(10))
def test_marginal_orientation_does_not_matter(seed):
    pts = random_pts(seed, max_states=5)
    d = random_pseudometric(seed, pts.n_states)
    for i, j in d.pairs():
        if not (pts.is_live(i) and pts.is_live(j)):
            continue
        forward, _ = transport_min(d.values, pts.row(j), pts.row(i))
        backward, _ = transport_min(d.values, pts.row(i), pts.row(j))
        assert forward == backward
        assert delta_dual(pts, d, i, j, F(1)).value == delta_dual(pts, d, j, i, F(1)).value


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("delta", [F(1, 2), F(2, 3), F(9, 10)])
def test_discount_scales_the_value(seed, delta):
    pts = random_pts(seed, max_states=5)
    d = random_pseudometric(seed + 100, pts.n_states)
    for i, j in d.pairs():
        assert delta_dual(pts, d, i, j, delta).value == delta * delta_dual(pts, d, i, j, F(1)).value


def test_evaluator_without_workers_never_starts_a_pool(ex1):
    with DeltaEvaluator() as evaluator:
        image = evaluator.apply(ex1, DistanceMatrix.top(5), F(1))
        assert not evaluator.pool_started
    assert image == apply_delta(ex1, DistanceMatrix.top(5), F(1))


@pytest.mark.slow
def test_evaluator_reuses_one_pool(ex1):
    d = random_pseudometric(11, 5)
    with DeltaEvaluator(workers=2) as evaluator:
        first = evaluator.apply(ex1, d, F(1))
        pool = evaluator._pool
        second = evaluator.apply(ex1, first, F(1))
        assert evaluator._pool is pool
    assert not evaluator.pool_started
    assert second == apply_delta(ex1, apply_delta(ex1, d, F(1)), F(1))
