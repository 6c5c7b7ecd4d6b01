"""
Greatest fixed point of the distance functional.

Lower bounds come from iterating the functional from the all-zero matrix.
Upper bounds come only from matrices verified, exactly, to be post-fixed
points. The differences between successive iterates are never used as a
bound.
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from app.config import settings
from models.errors import InvalidPseudometricError, SingularSystemError
from models.schemas import (
    PTS,
    BoundsResult,
    CertificateMethod,
    Coupling,
    DistanceMatrix,
    KnownDistances,
    Pair,
    PostFixedReport,
    PostFixedViolation,
)
from services.bisimulation import bisimilarity_partition, quotient
from services.kantorovich import DeltaEvaluator, apply_delta, delta_dual
from services.termination import (
    case_split_distances,
    shortcut_distances,
    termination_probabilities,
)
from services.validation import validate_pseudometric
from utils.matrices import inflate, lift, max_gap, round_down, solve_exact

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

# inflation constants tried: epsilon/2, epsilon/4, ...
INFLATION_STEPS = 6


def iterate(
    pts: PTS,
    delta: Fraction,
    n: int,
    workers: int = 1,
    round_down_denominator: Optional[int] = None,
) -> DistanceMatrix:
    """
    The n-th iterate of the functional from the all-zero matrix.

    Args:
        pts: The transition system
        delta: Discount in (0,1]
        n: Number of applications
        workers: Process-pool size for pair evaluation
        round_down_denominator: When set, floor each iterate to this grid

    Returns:
        The n-th iterate (exact unless rounding is requested)
    """
    d = DistanceMatrix.top(pts.n_states)
    with DeltaEvaluator(workers) as evaluator:
        for _ in range(n):
            d = evaluator.apply(pts, d, delta)
            if round_down_denominator:
                d = round_down(d, round_down_denominator)
    return d


def is_post_fixed(
    pts: PTS,
    d: DistanceMatrix,
    delta: Fraction,
    workers: int = 1,
    evaluator: Optional[DeltaEvaluator] = None,
) -> PostFixedReport:
    """
    Check Delta(d) <= d entrywise.

    Raises:
        InvalidPseudometricError: when d is not a 1-bounded pseudometric
    """
    report = validate_pseudometric(d)
    if not report.ok:
        raise InvalidPseudometricError(report)
    image = evaluator.apply(pts, d, delta) if evaluator else apply_delta(pts, d, delta, workers)
    violations = [
        PostFixedViolation(pair=(i, j), current=d[i, j], image=image[i, j])
        for i, j in d.pairs()
        if image[i, j] > d[i, j]
    ]
    return PostFixedReport(violations=tuple(violations))


def known_distances(pts: PTS, delta: Fraction) -> KnownDistances:
    """Exactly known pairs: termination shortcuts undiscounted, case-split pins otherwise."""
    if delta == ONE:
        return shortcut_distances(pts, termination_probabilities(pts))
    return case_split_distances(pts, delta)


def _known_matrix(known: KnownDistances) -> DistanceMatrix:
    return DistanceMatrix.from_pairs(known.n_states, dict(known.values))


def _solve_for_couplings(
    pts: PTS,
    delta: Fraction,
    known: KnownDistances,
    unknown: List[Pair],
    couplings: Dict[Pair, Coupling],
) -> DistanceMatrix:
    """Solve d(p) = delta * sum mu_p(r,c) d(r,c) over the unknown pairs with fixed couplings."""
    position = {pair: k for k, pair in enumerate(unknown)}
    size = len(unknown)
    a = [[ZERO] * size for _ in range(size)]
    b = [ZERO] * size
    for k, pair in enumerate(unknown):
        a[k][k] += ONE
        for r, c, mass in couplings[pair].support():
            if r == c:
                continue
            key = (min(r, c), max(r, c))
            value = known.get(r, c)
            if value is not None:
                b[k] += delta * mass * value
            else:
                a[k][position[key]] -= delta * mass
    solution = solve_exact(a, b)
    entries = dict(known.values)
    entries.update(zip(unknown, solution))
    return DistanceMatrix.from_pairs(pts.n_states, entries)


def exact_solve(
    pts: PTS,
    delta: Fraction,
    seed: DistanceMatrix,
    known: Optional[KnownDistances] = None,
    rounds: Optional[int] = None,
    notes: Optional[List[str]] = None,
    evaluator: Optional[DeltaEvaluator] = None,
) -> Optional[DistanceMatrix]:
    """
    Try to hit the fixed point exactly by fixing couplings and solving a linear system.

    Couplings start as the optimal ones at the seed. After each solve a pair
    switches to the optimal coupling at the candidate only when that is
    strictly cheaper. The candidate is returned only when it is a
    pseudometric and an exact fixed point.

    Args:
        pts: The transition system
        delta: Discount in (0,1]
        seed: Usually an iterate of the functional
        known: Pinned pairs (defaults to known_distances)
        rounds: Coupling improvement rounds (defaults to settings.coupling_rounds)
        notes: Collects a message when stabilisation does not converge
        evaluator: Shared evaluator (a single-process one is used otherwise)

    Returns:
        The verified fixed point, or None
    """
    known = known if known is not None else known_distances(pts, delta)
    rounds = rounds if rounds is not None else settings.coupling_rounds
    evaluator = evaluator or DeltaEvaluator()
    unknown = known.unknown_pairs()

    if not unknown:
        candidate = _known_matrix(known)
    else:
        witnesses = evaluator.with_witnesses(pts, seed, delta, pairs=unknown)
        couplings = {pair: w.coupling for pair, w in witnesses.items()}

        candidate = None
        for round_number in range(1, rounds + 1):
            try:
                candidate = _solve_for_couplings(pts, delta, known, unknown, couplings)
            except SingularSystemError as e:
                logger.warning(f"exact_solve: {e}")
                return None

            switched = 0
            for pair in unknown:
                better = delta_dual(pts, candidate, pair[0], pair[1], delta)
                if better.value < candidate[pair]:
                    couplings[pair] = better.coupling
                    switched += 1
            if not switched:
                logger.debug(f"exact_solve: couplings stable after {round_number} rounds")
                break
        else:
            message = f"coupling stabilisation did not converge in {rounds} rounds"
            logger.warning(f"exact_solve: {message}")
            if notes is not None and message not in notes:
                notes.append(message)
            return None

    if not validate_pseudometric(candidate).ok:
        logger.debug("exact_solve: candidate is not a pseudometric")
        return None
    if evaluator.apply(pts, candidate, delta) != candidate:
        logger.debug("exact_solve: candidate is not a fixed point")
        return None
    return candidate


def _lower_bound(iterate_d: DistanceMatrix, known: KnownDistances) -> DistanceMatrix:
    """Iterate with known exact values merged in, when that is still a pseudometric."""
    merged = iterate_d.with_entries({
        pair: max(value, iterate_d[pair]) for pair, value in known.values.items()
    })
    return merged if validate_pseudometric(merged).ok else iterate_d


def _inflation_certificate(
    pts: PTS,
    lower: DistanceMatrix,
    delta: Fraction,
    epsilon: Fraction,
    evaluator: DeltaEvaluator,
) -> Optional[DistanceMatrix]:
    """First post-fixed min(1, lower + c) for c = epsilon/2, epsilon/4, ...; its gap is at most c."""
    c = epsilon / 2
    for _ in range(INFLATION_STEPS):
        candidate = inflate(lower, c)
        if is_post_fixed(pts, candidate, delta, evaluator=evaluator).ok:
            return candidate
        c /= 2
    return None


def _pairs_equal(lower: DistanceMatrix, upper: DistanceMatrix) -> Tuple[Pair, ...]:
    return tuple(pair for pair in lower.pairs() if lower[pair] == upper[pair])


def approximate_all(
    pts: PTS,
    delta: Fraction,
    epsilon: Fraction,
    use_quotient: bool = True,
    budget: Optional[int] = None,
    workers: Optional[int] = None,
    round_down_denominator: Optional[int] = None,
    coupling_rounds: Optional[int] = None,
) -> BoundsResult:
    """
    Certified bounds lower <= d <= upper on every pair of states.

    Pipeline: quotient by bisimilarity, pin known pairs, then iterate the
    functional. Each round tries an exact solve and, failing that, an inflated
    certificate; the first one found ends the loop. The discrete metric is the
    certificate only when the budget runs out. Results are lifted back
    through the quotient and the certificate is rechecked on the input.

    Args:
        pts: The transition system
        delta: Discount in (0,1]
        epsilon: Target gap
        use_quotient: Work on the bisimulation quotient
        budget: Iteration rounds (defaults to factor * N^2 from settings)
        workers: Process-pool size for pair evaluation
        round_down_denominator: Optional grid for rounding iterates down
        coupling_rounds: Passed to exact_solve (defaults to settings.coupling_rounds)

    Returns:
        BoundsResult; `certified` is set iff the gap is at most epsilon
    """
    workers = workers or settings.workers
    if round_down_denominator is None:
        round_down_denominator = settings.round_down_denominator
    notes: List[str] = []

    # Step 1: quotient
    if use_quotient:
        reduced = quotient(pts, bisimilarity_partition(pts))
        work, projection = reduced.quotient, reduced.projection
    else:
        work, projection = pts, tuple(range(pts.n_states))
    budget = budget or settings.iteration_budget(work.n_states)
    logger.info(f"approximate_all: {pts.n_states} states, working on {work.n_states}, budget {budget}")

    # Step 2: pins
    known = known_distances(work, delta)

    with DeltaEvaluator(workers) as evaluator:
        # Step 3: iterate; each round try an exact solve, then an inflated certificate
        d = DistanceMatrix.top(work.n_states)
        exact: Optional[DistanceMatrix] = None
        certificate: Optional[DistanceMatrix] = None
        iterations = 0
        if not known.unknown_pairs():
            exact = exact_solve(work, delta, d, known, coupling_rounds, notes, evaluator)
        while exact is None and certificate is None and iterations < budget:
            d = evaluator.apply(work, d, delta)
            if round_down_denominator:
                d = round_down(d, round_down_denominator)
            iterations += 1
            exact = exact_solve(work, delta, d, known, coupling_rounds, notes, evaluator)
            if exact is None:
                certificate = _inflation_certificate(work, _lower_bound(d, known), delta, epsilon, evaluator)
            logger.debug(
                f"approximate_all: round {iterations}, "
                f"exact solve {'found' if exact else 'failed'}, "
                f"inflation {'found' if certificate else 'failed'}"
            )

        # Step 4: certificate
        if exact is not None:
            lower = upper = certificate = exact
            method = CertificateMethod.EXACT
        else:
            lower = _lower_bound(d, known)
            if certificate is not None:
                method = CertificateMethod.INFLATION
            else:
                certificate = DistanceMatrix.bottom(work.n_states)
                method = CertificateMethod.DISCRETE
                notes.append(f"no inflated certificate within {budget} rounds; upper bound is the discrete metric")
            upper = certificate
        logger.info(f"approximate_all: certificate by {method.value} after {iterations} rounds")

        # Step 5: lift back and recheck the certificate on the input system
        lifted_ok = True
        if use_quotient:
            lower, upper, certificate = (lift(m, projection) for m in (lower, upper, certificate))
            lifted_ok = is_post_fixed(pts, certificate, delta, evaluator=evaluator).ok

    if not lifted_ok:
        logger.error("approximate_all: lifted certificate is not post-fixed; retrying without quotient")
        return approximate_all(
            pts, delta, epsilon, use_quotient=False, budget=budget, workers=workers,
            round_down_denominator=round_down_denominator, coupling_rounds=coupling_rounds,
        )

    gap = max_gap(lower, upper)
    return BoundsResult(
        lower=lower,
        upper=upper,
        exact_pairs=_pairs_equal(lower, upper),
        certificate=certificate,
        iterations=iterations,
        gap=gap,
        certified=gap <= epsilon,
        method=method,
        delta=delta,
        epsilon=epsilon,
        quotiented=use_quotient,
        notes=tuple(notes),
    )
