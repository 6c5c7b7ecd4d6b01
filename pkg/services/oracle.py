"""
Decision oracles for distance sentences and the bisection search built on them.

The internal oracle answers from certified bounds: the sentence for
(pair, m) is true iff the undiscounted distance is at most m. The external
oracle hands the emitted script to a solver process.
"""
import logging
import os
import re
import shlex
import subprocess
import tempfile
from fractions import Fraction
from typing import Dict, List, Optional, Tuple, Union

from app.config import settings
from models.errors import OracleError
from models.formulas import DistanceSentence
from models.schemas import (
    PTS,
    BisectionStep,
    BoundsResult,
    Decision,
    DecisionOutcome,
    EmitFormat,
    IntervalMethod,
    OracleConfig,
    OracleKind,
    PairInterval,
    Provenance,
)
from services.encoder import build_sentence, emit_mathematica, emit_smtlib, simplify_sentence
from services.fixpoint import approximate_all, known_distances
from services.pts_io import serialize_pts
from utils.rationals import format_rational

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

VERDICT_PATTERN = re.compile(r"^\s*(sat|unsat|True|False)\s*$")
SCRIPT_PLACEHOLDER = "{script}"


class InternalOracle:
    """Decides sentences from approximate_all bounds, refining epsilon when undecided."""

    def __init__(self, epsilon: Optional[Fraction] = None, refinements: Optional[int] = None):
        self.epsilon = epsilon or settings.epsilon
        self.refinements = refinements if refinements is not None else settings.internal_oracle_refinements
        self._cache: Dict[Tuple[str, Fraction], BoundsResult] = {}

    def bounds(self, pts: PTS, epsilon: Fraction) -> BoundsResult:
        key = (serialize_pts(pts), epsilon)
        if key not in self._cache:
            self._cache[key] = approximate_all(pts, ONE, epsilon)
        return self._cache[key]

    def decide(self, sentence: DistanceSentence) -> Decision:
        i, j = sentence.pair
        m = sentence.bound
        epsilon = self.epsilon
        for _ in range(self.refinements + 1):
            result = self.bounds(sentence.pts, epsilon)
            lower, upper = result.lower[i, j], result.upper[i, j]
            if upper <= m:
                return Decision(
                    outcome=DecisionOutcome.TRUE,
                    provenance=Provenance.INTERNAL,
                    diagnostics=f"certified upper bound {format_rational(upper)} <= {format_rational(m)}",
                )
            if lower > m:
                return Decision(
                    outcome=DecisionOutcome.FALSE,
                    provenance=Provenance.INTERNAL,
                    diagnostics=f"lower bound {format_rational(lower)} > {format_rational(m)}",
                )
            epsilon = epsilon / 16
        return Decision(
            outcome=DecisionOutcome.UNKNOWN,
            provenance=Provenance.INTERNAL,
            diagnostics=(
                f"bound {format_rational(m)} lies inside "
                f"[{format_rational(lower)}, {format_rational(upper)}]"
            ),
        )


class ExternalOracle:
    """Runs a solver command on the emitted script and parses its verdict."""

    def __init__(self, config: OracleConfig):
        self.config = config

    def command_for(self, script_path: str) -> List[str]:
        template = self.config.command
        if SCRIPT_PLACEHOLDER in template:
            return shlex.split(template.replace(SCRIPT_PLACEHOLDER, shlex.quote(script_path)))
        return shlex.split(template) + [script_path]

    def decide(self, sentence: DistanceSentence) -> Decision:
        if not sentence.simplified:
            sentence = simplify_sentence(sentence, known_distances(sentence.pts, ONE))
        if self.config.format == EmitFormat.MATHEMATICA:
            script, suffix = emit_mathematica(sentence.formula), ".m"
        else:
            script, suffix = emit_smtlib(sentence.formula), ".smt2"

        # distinct file per call so concurrent decides do not collide
        handle = tempfile.NamedTemporaryFile(
            mode="w", suffix=suffix, prefix="ptsdist-", dir=self.config.tmp_dir, delete=False,
        )
        try:
            with handle:
                handle.write(script)
            command = self.command_for(handle.name)
            logger.info(f"Running oracle: {' '.join(command)}")
            try:
                completed = subprocess.run(
                    command, capture_output=True, text=True, timeout=self.config.timeout,
                )
            except subprocess.TimeoutExpired:
                return self._failure(f"oracle timed out after {self.config.timeout} seconds")
            except OSError as e:
                return self._failure(f"could not start oracle: {e}")

            for line in completed.stdout.splitlines():
                match = VERDICT_PATTERN.match(line)
                if match:
                    verdict = match.group(1)
                    return Decision(
                        outcome=DecisionOutcome.TRUE if verdict in ("sat", "True") else DecisionOutcome.FALSE,
                        provenance=Provenance.EXTERNAL,
                        diagnostics=completed.stderr.strip(),
                        verdict_line=line.strip(),
                    )
            return self._failure(
                f"no verdict in oracle output (exit code {completed.returncode}): "
                f"{(completed.stdout + completed.stderr).strip()[:500]}"
            )
        finally:
            try:
                os.unlink(handle.name)
            except OSError:
                logger.warning(f"Could not remove oracle script {handle.name}")

    @staticmethod
    def _failure(message: str) -> Decision:
        logger.error(message)
        return Decision(
            outcome=DecisionOutcome.UNKNOWN,
            provenance=Provenance.EXTERNAL,
            diagnostics=message,
            failed=True,
        )


Oracle = Union[InternalOracle, ExternalOracle]


def make_oracle(config: Optional[OracleConfig] = None) -> Oracle:
    config = config or OracleConfig()
    if config.kind == OracleKind.EXTERNAL:
        return ExternalOracle(config)
    return InternalOracle()


def decide(sentence: DistanceSentence, oracle: Union[OracleConfig, Oracle, None] = None) -> Decision:
    """
    Decide `exists d . pseudo & post_fixed & d_i0j0 <= m`.

    Args:
        sentence: Built by encoder.build_sentence
        oracle: Configuration or an oracle instance (internal by default)

    Returns:
        Decision with outcome, provenance and diagnostics
    """
    if oracle is None or isinstance(oracle, OracleConfig):
        oracle = make_oracle(oracle)
    return oracle.decide(sentence)


def approximate_pair(
    pts: PTS,
    i0: int,
    j0: int,
    epsilon: Fraction,
    oracle: Union[OracleConfig, Oracle, None] = None,
) -> PairInterval:
    """
    Bisection on m in [0, 1] until the interval is at most epsilon wide.

    An undecided internal query ends the search with the certified bounds
    intersected with the current interval (method `bounds`).

    Raises:
        OracleError: when the external oracle fails; carries the interval so far
    """
    if oracle is None or isinstance(oracle, OracleConfig):
        oracle = make_oracle(oracle)
    lower, upper = ZERO, ONE
    steps: List[BisectionStep] = []
    method = IntervalMethod.BISECTION
    diagnostics = ""

    while upper - lower > epsilon:
        m = (lower + upper) / 2
        decision = oracle.decide(build_sentence(pts, i0, j0, m))
        steps.append(BisectionStep(bound=m, outcome=decision.outcome))
        logger.debug(f"approximate_pair: m={m} -> {decision.outcome.value}")
        if decision.outcome == DecisionOutcome.TRUE:
            upper = m
        elif decision.outcome == DecisionOutcome.FALSE:
            lower = m
        elif isinstance(oracle, InternalOracle):
            bounds = oracle.bounds(pts, epsilon)
            lower = max(lower, bounds.lower[i0, j0])
            upper = min(upper, bounds.upper[i0, j0])
            method = IntervalMethod.BOUNDS
            diagnostics = decision.diagnostics
            if not bounds.certified:
                logger.warning(f"approximate_pair: bounds not certified, width {upper - lower}")
            break
        else:
            raise OracleError(
                f"oracle gave no verdict for m = {format_rational(m)}: {decision.diagnostics}",
                interval=(lower, upper),
            )

    return PairInterval(
        pair=(i0, j0),
        lower=lower,
        upper=upper,
        method=method,
        steps=tuple(steps),
        diagnostics=diagnostics,
    )
