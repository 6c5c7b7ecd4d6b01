"""
Structural checks for transition systems and distance matrices.

Violations are returned as data; only classify_states raises.
"""
import logging
from typing import List, Tuple

from models.errors import InvalidPtsError
from models.schemas import (
    PTS,
    DistanceMatrix,
    StateKind,
    ValidationReport,
    Violation,
)
from utils.rationals import format_rational

logger = logging.getLogger(__name__)


def validate_pts(pts: PTS) -> ValidationReport:
    """
    Check that every row sums to exactly 0 or 1 with entries in [0,1].

    Args:
        pts: The transition system

    Returns:
        Report listing each offending entry or row (1-based)
    """
    violations: List[Violation] = []
    for i, row in enumerate(pts.pi):
        for j, p in enumerate(row):
            if p < 0 or p > 1:
                violations.append(Violation(
                    kind="entry_range",
                    message=f"pi(s{i + 1},s{j + 1}) = {format_rational(p)} is outside [0,1]",
                    indices=(i + 1, j + 1),
                    value=p,
                ))
        row_sum = pts.row_sum(i)
        if row_sum != 0 and row_sum != 1:
            violations.append(Violation(
                kind="row_sum",
                message=f"row {i + 1} sums to {format_rational(row_sum)}, expected 0 or 1",
                indices=(i + 1,),
                value=row_sum,
            ))
    if violations:
        logger.debug(f"PTS validation found {len(violations)} violations")
    return ValidationReport(violations=tuple(violations))


def classify_states(pts: PTS) -> Tuple[StateKind, ...]:
    """Live iff the row sums to 1, Stuck iff it sums to 0."""
    report = validate_pts(pts)
    if not report.ok:
        raise InvalidPtsError(report)
    return tuple(
        StateKind.LIVE if pts.row_sum(i) == 1 else StateKind.STUCK
        for i in range(pts.n_states)
    )


def validate_pseudometric(d: DistanceMatrix) -> ValidationReport:
    """
    Check range, zero diagonal, symmetry and every triangle d(h,j) <= d(h,i) + d(i,j).

    Returns:
        Report whose violations name the offending pair or triple (1-based)
    """
    n = d.size
    values = d.values
    violations: List[Violation] = []

    for i in range(n):
        if values[i][i] != 0:
            violations.append(Violation(
                kind="diagonal",
                message=f"d(s{i + 1},s{i + 1}) = {format_rational(values[i][i])}, expected 0",
                indices=(i + 1, i + 1),
                value=values[i][i],
            ))
        for j in range(n):
            v = values[i][j]
            if v < 0 or v > 1:
                violations.append(Violation(
                    kind="range",
                    message=f"d(s{i + 1},s{j + 1}) = {format_rational(v)} is outside [0,1]",
                    indices=(i + 1, j + 1),
                    value=v,
                ))
            if j > i and v != values[j][i]:
                violations.append(Violation(
                    kind="symmetry",
                    message=f"d(s{i + 1},s{j + 1}) != d(s{j + 1},s{i + 1})",
                    indices=(i + 1, j + 1),
                ))

    for h in range(n):
        for i in range(n):
            d_hi = values[h][i]
            for j in range(n):
                if values[h][j] > d_hi + values[i][j]:
                    violations.append(Violation(
                        kind="triangle",
                        message=(
                            f"triangle ({h + 1},{i + 1},{j + 1}): d(s{h + 1},s{j + 1}) = "
                            f"{format_rational(values[h][j])} > "
                            f"{format_rational(d_hi + values[i][j])}"
                        ),
                        indices=(h + 1, i + 1, j + 1),
                        value=values[h][j] - d_hi - values[i][j],
                    ))
    return ValidationReport(violations=tuple(violations))
