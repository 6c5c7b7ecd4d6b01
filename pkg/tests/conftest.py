"""
Shared fixtures: the five-state running example and seeded random systems.
"""
import random
from fractions import Fraction as F
from typing import List

import pytest

from models.schemas import PTS, DistanceMatrix
from utils.matrices import metric_closure

EX1_TEXT = """\
pts v1
states 5
# s4 is the only stuck state
arc 1 2 2/5
arc 1 3 3/5
arc 2 1 7/10
arc 2 4 1/5
arc 2 5 1/10
arc 3 3 1
arc 5 5 1
"""

EX1_ROWS = [
    [F(0), F(2, 5), F(3, 5), F(0), F(0)],
    [F(7, 10), F(0), F(0), F(1, 5), F(1, 10)],
    [F(0), F(0), F(1), F(0), F(0)],
    [F(0), F(0), F(0), F(0), F(0)],
    [F(0), F(0), F(0), F(0), F(1)],
]


@pytest.fixture
def ex1() -> PTS:
    return PTS.from_rows(EX1_ROWS)


@pytest.fixture
def ex1_file(tmp_path):
    path = tmp_path / "ex1.pts"
    path.write_text(EX1_TEXT)
    return path


def random_distribution(rng: random.Random, n: int, max_successors: int = 3) -> List[F]:
    """Distribution over n states with 1..max_successors support points and small denominators."""
    k = rng.randint(1, min(max_successors, n))
    support = rng.sample(range(n), k)
    denominator = rng.choice([2, 3, 4, 5, 6])
    cuts = sorted(rng.randint(0, denominator) for _ in range(k - 1))
    weights = [b - a for a, b in zip([0] + cuts, cuts + [denominator])]
    row = [F(0)] * n
    for state, weight in zip(support, weights):
        row[state] += F(weight, denominator)
    return row


def random_pts(seed: int, min_states: int = 2, max_states: int = 6, stuck_rate: float = 0.2) -> PTS:
    rng = random.Random(seed)
    n = rng.randint(min_states, max_states)
    rows = [
        [F(0)] * n if rng.random() < stuck_rate else random_distribution(rng, n)
        for _ in range(n)
    ]
    return PTS.from_rows(rows)


def random_pseudometric(seed: int, n: int) -> DistanceMatrix:
    rng = random.Random(seed)
    entries = {
        (i, j): F(rng.randint(0, 6), 6)
        for i in range(n) for j in range(i + 1, n)
    }
    return metric_closure(DistanceMatrix.from_pairs(n, entries))
