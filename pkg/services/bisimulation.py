"""
Probabilistic bisimilarity by partition refinement, and quotient systems.
"""
import logging
from collections import defaultdict
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from models.errors import NotABisimulationError
from models.schemas import PTS, Partition, QuotientResult

logger = logging.getLogger(__name__)

ZERO = Fraction(0)


def _block_masses(pts: PTS, state: int, block_of: Sequence[int], n_blocks: int) -> Tuple[Fraction, ...]:
    masses = [ZERO] * n_blocks
    for target, p in enumerate(pts.pi[state]):
        if p:
            masses[block_of[target]] += p
    return tuple(masses)


def _ordered(blocks: List[List[int]]) -> Tuple[Tuple[int, ...], ...]:
    return tuple(sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0]))


def bisimilarity_partition(pts: PTS) -> Partition:
    """
    Coarsest probabilistic bisimulation of a system.

    Starts from the live/stuck split and splits every block by the vector of
    masses its members send into the current blocks, until nothing changes.

    Args:
        pts: A valid transition system

    Returns:
        Partition with blocks ordered by their lowest member
    """
    live = [i for i in range(pts.n_states) if pts.is_live(i)]
    stuck = [i for i in range(pts.n_states) if not pts.is_live(i)]
    blocks = _ordered([b for b in (live, stuck) if b])

    rounds = 0
    while True:
        rounds += 1
        block_of = Partition(blocks=blocks).block_of
        refined: List[List[int]] = []
        for block in blocks:
            groups: Dict[Tuple[Fraction, ...], List[int]] = defaultdict(list)
            for state in block:
                groups[_block_masses(pts, state, block_of, len(blocks))].append(state)
            refined.extend(groups.values())
        if len(refined) == len(blocks):
            break
        blocks = _ordered(refined)

    logger.debug(f"Bisimilarity: {len(blocks)} blocks after {rounds} refinement rounds")
    return Partition(blocks=blocks)


def find_violation(pts: PTS, part: Partition) -> Optional[Tuple[Tuple[int, int], int]]:
    """First (pair, block) where two members of a block disagree on the mass into a block."""
    block_of = part.block_of
    n_blocks = len(part.blocks)
    for block in part.blocks:
        reference = _block_masses(pts, block[0], block_of, n_blocks)
        for state in block[1:]:
            masses = _block_masses(pts, state, block_of, n_blocks)
            for target, (a, b) in enumerate(zip(reference, masses)):
                if a != b:
                    return (block[0], state), target
    return None


def is_bisimulation(pts: PTS, part: Partition) -> bool:
    return find_violation(pts, part) is None


def quotient(pts: PTS, part: Partition) -> QuotientResult:
    """
    Build the quotient system over the blocks of a bisimulation.

    The quotient row of a block is the block-summed row of its lowest member;
    every other member is checked to give the same row.

    Raises:
        NotABisimulationError: naming the first offending pair and target block
    """
    if part.n_states != pts.n_states:
        raise ValueError(
            f"partition covers {part.n_states} states but the system has {pts.n_states}"
        )
    violation = find_violation(pts, part)
    if violation is not None:
        pair, block = violation
        raise NotABisimulationError(pair, block)

    block_of = part.block_of
    n_blocks = len(part.blocks)
    rows = [_block_masses(pts, block[0], block_of, n_blocks) for block in part.blocks]
    labels = tuple("+".join(pts.name(s) for s in block) for block in part.blocks)

    logger.info(f"Quotient: {pts.n_states} states -> {n_blocks} blocks")
    return QuotientResult(
        quotient=PTS.from_rows(rows, labels=labels),
        projection=block_of,
        partition=part,
    )
