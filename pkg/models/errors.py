"""
Exception hierarchy for the distance engine.

Every error raised on bad input derives from EngineError, which is a
ValueError so callers that only know about value errors keep working.
"""
from typing import Any, Optional, Tuple


class EngineError(ValueError):
    """Base class for all engine errors."""


class PtsFormatError(EngineError):
    """Syntax or structural error in a `pts v1` / `metric v1` document."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")


class InvalidPtsError(EngineError):
    """A transition matrix violates the row-sum rule."""

    def __init__(self, report: Any):
        self.report = report
        details = "; ".join(v.message for v in report.violations)
        super().__init__(f"invalid probabilistic transition system: {details}")


class InvalidPseudometricError(EngineError):
    """A distance matrix is not a 1-bounded pseudometric."""

    def __init__(self, report: Any):
        self.report = report
        details = "; ".join(v.message for v in report.violations[:5])
        more = len(report.violations) - 5
        if more > 0:
            details += f"; ... and {more} more"
        super().__init__(f"not a 1-bounded pseudometric: {details}")


class NotABisimulationError(EngineError):
    """A partition is not a probabilistic bisimulation."""

    def __init__(self, pair: Tuple[int, int], block: int):
        self.pair = pair
        self.block = block
        super().__init__(
            f"states s{pair[0] + 1} and s{pair[1] + 1} share a block but send "
            f"different mass into block {block + 1}"
        )


class DimensionError(EngineError):
    """Inconsistent dimensions in a matrix or linear program."""


class MarginalError(EngineError):
    """Transport marginals that are negative or do not sum to one."""


class SingularSystemError(EngineError):
    """A linear system expected to have a unique solution does not."""


class KnownDistanceConflict(EngineError):
    """A pinned distance makes a pseudo/post-fixed conjunct false."""

    def __init__(self, conjunct: str):
        self.conjunct = conjunct
        super().__init__(f"known distances contradict conjunct: {conjunct}")


class FormulaSyntaxError(EngineError):
    """Error in the textual modal-formula syntax."""

    def __init__(self, position: int, message: str):
        self.position = position
        super().__init__(f"column {position + 1}: {message}")


class OracleError(EngineError):
    """An external decision procedure failed to produce a verdict."""

    def __init__(self, message: str, interval: Optional[Tuple[Any, Any]] = None):
        self.interval = interval
        super().__init__(message)
