from fractions import Fraction as F

import pytest

from models.schemas import PTS
from services.termination import (
    case_split_distances,
    shortcut_distances,
    termination_iterate,
    termination_probabilities,
)
from tests.conftest import random_pts


def test_example_termination(ex1):
    tau = termination_probabilities(ex1)
    assert tau.values == (F(1, 9), F(5, 18), F(0), F(1), F(0))


def test_trivial_systems():
    loop = PTS.from_rows([[F(1)]])
    assert termination_probabilities(loop).values == (F(0),)
    stuck = PTS.from_rows([[F(0), F(0)], [F(0), F(0)]])
    assert termination_probabilities(stuck).values == (F(1), F(1))


def test_example_shortcuts(ex1):
    known = shortcut_distances(ex1, termination_probabilities(ex1))
    assert known.get(0, 2) == F(1, 9)
    assert known.get(4, 1) == F(5, 18)
    assert known.get(2, 4) == 0
    assert all(known.get(i, 3) == 1 for i in (0, 1, 2, 4))
    assert known.unknown_pairs() == [(0, 1)]


def test_case_split_pins(ex1):
    known = case_split_distances(ex1, F(1, 2))
    assert known.get(2, 3) == F(1, 2)
    assert not known.is_known(0, 2)


@pytest.mark.parametrize("seed", range(15))
def test_iterates_increase_towards_termination(seed):
    pts = random_pts(seed)
    tau = termination_probabilities(pts)
    previous = termination_iterate(pts, 0)
    for n in range(1, 6):
        current = termination_iterate(pts, n)
        for a, b, limit in zip(previous.values, current.values, tau.values):
            assert a <= b <= limit
        previous = current
