"""
The distance functional: one Kantorovich step over successor distributions.

For a pair of states the functional is 0 when both are stuck, the discount
when exactly one is stuck, and otherwise the discount times the optimal
transport cost between their successor distributions under d.
"""
import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from models.errors import EngineError
from models.schemas import (
    PTS,
    Constraint,
    DeltaCase,
    DeltaValue,
    DistanceMatrix,
    LinearProgram,
    LpStatus,
    Pair,
    Relation,
    Sense,
    VariableBound,
)
from services.simplex import lp_solve
from services.transport import transport_min

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


def _case(pts: PTS, i: int, j: int) -> DeltaCase:
    live_i, live_j = pts.is_live(i), pts.is_live(j)
    if live_i and live_j:
        return DeltaCase.BOTH_LIVE
    if not live_i and not live_j:
        return DeltaCase.BOTH_STUCK
    return DeltaCase.MIXED


def _trivial(pair: Pair, case: DeltaCase, delta: Fraction) -> DeltaValue:
    value = ZERO if case == DeltaCase.BOTH_STUCK else delta
    return DeltaValue(pair=pair, value=value, case=case)


def delta_dual(pts: PTS, d: DistanceMatrix, i: int, j: int, delta: Fraction) -> DeltaValue:
    """
    Evaluate the functional at (i, j) through minimum-cost transport.

    Row marginal is pi(s_j, .), column marginal is pi(s_i, .).

    Returns:
        The value with an optimal coupling as witness when both states are live
    """
    case = _case(pts, i, j)
    if case != DeltaCase.BOTH_LIVE:
        return _trivial((i, j), case, delta)
    value, coupling = transport_min(d.values, pts.row(j), pts.row(i))
    return DeltaValue(pair=(i, j), value=delta * value, case=case, coupling=coupling)


def delta_primal(pts: PTS, d: DistanceMatrix, i: int, j: int, delta: Fraction) -> DeltaValue:
    """
    Evaluate the functional at (i, j) as the best nonexpansive test function.

    Maximises sum_s f(s) (pi(s_i,s) - pi(s_j,s)) over f in [0,1]^N with
    f(s) - f(s') <= d(s,s') for every ordered pair.

    Returns:
        The value with the optimal f as witness when both states are live
    """
    case = _case(pts, i, j)
    if case != DeltaCase.BOTH_LIVE:
        return _trivial((i, j), case, delta)

    n = pts.n_states
    constraints: List[Constraint] = []
    for s in range(n):
        for t in range(n):
            if s == t:
                continue
            coefficients = [ZERO] * n
            coefficients[s] = ONE
            coefficients[t] = -ONE
            constraints.append(Constraint(coefficients=coefficients, relation=Relation.LE, rhs=d[s, t]))

    lp = LinearProgram(
        objective=tuple(a - b for a, b in zip(pts.row(i), pts.row(j))),
        sense=Sense.MAX,
        constraints=tuple(constraints),
        bounds=tuple(VariableBound(lower=ZERO, upper=ONE) for _ in range(n)),
    )
    outcome = lp_solve(lp)
    if outcome.status != LpStatus.OPTIMAL:
        raise EngineError(f"nonexpansive-function program for pair ({i + 1},{j + 1}) is {outcome.status.value}")
    return DeltaValue(pair=(i, j), value=delta * outcome.value, case=case, witness=outcome.solution)


def _evaluate(args: Tuple[PTS, DistanceMatrix, int, int, Fraction]) -> DeltaValue:
    pts, d, i, j, delta = args
    return delta_dual(pts, d, i, j, delta)


class DeltaEvaluator:
    """
    Evaluates the functional over many pairs.

    With workers > 1 the pairs are spread over a process pool that is created
    on first use and kept until close(), so one pool serves a whole run.
    """

    def __init__(self, workers: int = 1):
        self.workers = max(1, workers)
        self._pool: Optional[ProcessPoolExecutor] = None

    def __enter__(self) -> "DeltaEvaluator":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def _executor(self) -> ProcessPoolExecutor:
        if self._pool is None:
            logger.info(f"Starting process pool with {self.workers} workers")
            self._pool = ProcessPoolExecutor(max_workers=self.workers)
        return self._pool

    def close(self) -> None:
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    @property
    def pool_started(self) -> bool:
        return self._pool is not None

    def with_witnesses(
        self,
        pts: PTS,
        d: DistanceMatrix,
        delta: Fraction,
        pairs: Optional[List[Pair]] = None,
    ) -> Dict[Pair, DeltaValue]:
        """Values keyed by pair, so the order of completion does not matter."""
        todo = list(pairs) if pairs is not None else list(d.pairs())
        if self.workers > 1 and len(todo) > 1:
            results = list(self._executor().map(
                _evaluate,
                [(pts, d, i, j, delta) for i, j in todo],
                chunksize=max(1, len(todo) // (self.workers * 4)),
            ))
        else:
            results = [delta_dual(pts, d, i, j, delta) for i, j in todo]
        return {value.pair: value for value in results}

    def apply(self, pts: PTS, d: DistanceMatrix, delta: Fraction) -> DistanceMatrix:
        values = self.with_witnesses(pts, d, delta)
        return DistanceMatrix.from_pairs(pts.n_states, {pair: v.value for pair, v in values.items()})


def apply_delta_with_witnesses(
    pts: PTS,
    d: DistanceMatrix,
    delta: Fraction,
    workers: int = 1,
    pairs: Optional[List[Pair]] = None,
) -> Dict[Pair, DeltaValue]:
    """Evaluate the functional on every unordered pair (or the given ones)."""
    with DeltaEvaluator(workers) as evaluator:
        return evaluator.with_witnesses(pts, d, delta, pairs)


def apply_delta(pts: PTS, d: DistanceMatrix, delta: Fraction, workers: int = 1) -> DistanceMatrix:
    """Delta(d) as a full symmetric matrix."""
    with DeltaEvaluator(workers) as evaluator:
        return evaluator.apply(pts, d, delta)
