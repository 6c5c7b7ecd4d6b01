"""
Termination probabilities and the distance shortcuts they give.
"""
import logging
from collections import deque
from fractions import Fraction
from typing import Dict, List, Set, Tuple

from models.schemas import PTS, KnownDistances, TerminationVector
from utils.matrices import solve_exact

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


def _can_reach_stuck(pts: PTS) -> Set[int]:
    """States with a path to a stuck state (backward search on the support digraph)."""
    predecessors: Dict[int, List[int]] = {j: [] for j in range(pts.n_states)}
    for i in range(pts.n_states):
        for j in pts.successors(i):
            predecessors[j].append(i)

    seen = {i for i in range(pts.n_states) if not pts.is_live(i)}
    queue = deque(seen)
    while queue:
        state = queue.popleft()
        for pred in predecessors[state]:
            if pred not in seen:
                seen.add(pred)
                queue.append(pred)
    return seen


def termination_probabilities(pts: PTS) -> TerminationVector:
    """
    Exact probability of eventually reaching a stuck state.

    Args:
        pts: A valid transition system

    Returns:
        1 for stuck states, 0 where no stuck state is reachable, otherwise
        the unique solution of tau = pi * tau on the remaining states
    """
    values = [ZERO] * pts.n_states
    reach = _can_reach_stuck(pts)

    # Step 1: stuck states
    for i in range(pts.n_states):
        if not pts.is_live(i):
            values[i] = ONE

    # Step 2: live states that can reach a stuck state
    unknown = [i for i in range(pts.n_states) if pts.is_live(i) and i in reach]
    if unknown:
        position = {s: k for k, s in enumerate(unknown)}
        a = [[ZERO] * len(unknown) for _ in unknown]
        b = [ZERO] * len(unknown)
        for k, s in enumerate(unknown):
            a[k][k] = ONE
            for t, p in enumerate(pts.pi[s]):
                if not p:
                    continue
                if t in position:
                    a[k][position[t]] -= p
                elif not pts.is_live(t):
                    b[k] += p
        for s, value in zip(unknown, solve_exact(a, b)):
            values[s] = value

    logger.debug(f"Termination probabilities solved for {len(unknown)} states")
    return TerminationVector(values=tuple(values))


def termination_iterate(pts: PTS, n: int) -> TerminationVector:
    """tau_n: n steps of tau(s) = sum pi(s,s') tau(s') from 0, stuck states fixed at 1."""
    stuck = [not pts.is_live(i) for i in range(pts.n_states)]
    values = [ZERO] * pts.n_states
    for _ in range(n):
        values = [
            ONE if stuck[i] else sum((p * values[j] for j, p in enumerate(pts.pi[i]) if p), ZERO)
            for i in range(pts.n_states)
        ]
    return TerminationVector(values=tuple(values))


def shortcut_distances(pts: PTS, tau: TerminationVector) -> KnownDistances:
    """
    Pairs whose undiscounted distance is known without iteration.

    Both stuck gives 0, live against stuck gives 1, and when one side never
    terminates the distance is the other side's termination probability.
    """
    known: Dict[Tuple[int, int], Fraction] = {}
    for i in range(pts.n_states):
        for j in range(i + 1, pts.n_states):
            live_i, live_j = pts.is_live(i), pts.is_live(j)
            if not live_i and not live_j:
                known[(i, j)] = ZERO
            elif live_i != live_j:
                known[(i, j)] = ONE
            elif tau[j] == 0:
                known[(i, j)] = tau[i]
            elif tau[i] == 0:
                known[(i, j)] = tau[j]
    return KnownDistances(n_states=pts.n_states, values=known)


def case_split_distances(pts: PTS, delta: Fraction) -> KnownDistances:
    """Pins that hold for every discount: both stuck 0, live against stuck delta."""
    known: Dict[Tuple[int, int], Fraction] = {}
    for i in range(pts.n_states):
        for j in range(i + 1, pts.n_states):
            live_i, live_j = pts.is_live(i), pts.is_live(j)
            if not live_i and not live_j:
                known[(i, j)] = ZERO
            elif live_i != live_j:
                known[(i, j)] = delta
    return KnownDistances(n_states=pts.n_states, values=known)
