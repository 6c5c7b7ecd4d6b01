from fractions import Fraction as F

import pytest

from models.errors import NotABisimulationError
from models.schemas import PTS, Partition
from services.bisimulation import bisimilarity_partition, find_violation, is_bisimulation, quotient
from services.fixpoint import approximate_all, iterate
from tests.conftest import random_pts


def test_example_partition(ex1):
    part = bisimilarity_partition(ex1)
    assert part.blocks == ((0,), (1,), (2, 4), (3,))


def test_example_quotient(ex1):
    result = quotient(ex1, bisimilarity_partition(ex1))
    q = result.quotient
    assert q.n_states == 4
    assert q.pi[1][2] == F(1, 10)
    assert q.pi[0][2] == F(3, 5)
    assert q.pi[2][2] == 1
    assert result.projection == (0, 1, 2, 3, 2)
    assert q.labels == ("s1", "s2", "s3+s5", "s4")


def test_quotient_rejects_non_bisimulation(ex1):
    part = Partition(blocks=((0, 1), (2, 4), (3,)))
    assert not is_bisimulation(ex1, part)
    with pytest.raises(NotABisimulationError, match="s1 and s2"):
        quotient(ex1, part)


def test_quotient_rejects_size_mismatch(ex1):
    with pytest.raises(ValueError):
        quotient(ex1, Partition.singletons(3))


def test_partition_validation():
    with pytest.raises(ValueError):
        Partition(blocks=((0, 1), (1,)))
    with pytest.raises(ValueError):
        Partition(blocks=((0,), (2,)))


def test_stuck_states_form_one_block():
    pts = PTS.from_rows([[F(0)] * 3 for _ in range(3)])
    assert bisimilarity_partition(pts).blocks == ((0, 1, 2),)


@pytest.mark.parametrize("seed", range(20))
def test_coarsest_partition_is_a_bisimulation(seed):
    pts = random_pts(seed)
    part = bisimilarity_partition(pts)
    assert find_violation(pts, part) is None
    assert is_bisimulation(pts, Partition.singletons(pts.n_states))


@pytest.mark.parametrize("seed", range(12))
def test_distance_is_zero_exactly_on_blocks(seed):
    pts = random_pts(seed + 300, max_states=5)
    part = bisimilarity_partition(pts)
    d = iterate(pts, F(1), pts.n_states + 1)
    upper = approximate_all(pts, F(1), F(1, 10), budget=5).upper
    for i, j in d.pairs():
        if part.block_of[i] == part.block_of[j]:
            assert d[i, j] == 0
            assert upper[i, j] == 0
        else:
            assert d[i, j] > 0
