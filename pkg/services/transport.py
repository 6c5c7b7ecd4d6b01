"""
Minimum-cost transport between two distributions, solved through the simplex kernel.
"""
import logging
from fractions import Fraction
from typing import List, Sequence, Tuple

from models.errors import DimensionError, MarginalError
from models.schemas import Constraint, Coupling, LinearProgram, LpStatus, Relation, Sense
from services.simplex import lp_solve
from utils.rationals import format_rational

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


def _check_marginal(name: str, marginal: Sequence[Fraction]) -> None:
    if any(m < 0 for m in marginal):
        raise MarginalError(f"{name} marginal has a negative entry")
    total = sum(marginal, ZERO)
    if total != ONE:
        raise MarginalError(f"{name} marginal sums to {format_rational(total)}, expected 1/1")


def transport_min(
    cost: Sequence[Sequence[Fraction]],
    row_marginal: Sequence[Fraction],
    col_marginal: Sequence[Fraction],
) -> Tuple[Fraction, Coupling]:
    """
    Cheapest coupling of two distributions under a cost matrix.

    Rows and columns with zero mass are fixed to 0 before solving, so the
    program only has one variable per pair of support points.

    Args:
        cost: cost[r][c] paid per unit of mass moved between r and c
        row_marginal: Required row sums
        col_marginal: Required column sums

    Returns:
        The optimal value and a coupling attaining it

    Raises:
        MarginalError: when a marginal is negative or does not sum to 1
    """
    n = len(row_marginal)
    if len(col_marginal) != n or len(cost) != n or any(len(row) != n for row in cost):
        raise DimensionError("cost matrix and marginals must have matching sizes")
    _check_marginal("row", row_marginal)
    _check_marginal("column", col_marginal)

    rows = [r for r in range(n) if row_marginal[r]]
    cols = [c for c in range(n) if col_marginal[c]]
    cells = [(r, c) for r in rows for c in cols]

    plan = [[ZERO] * n for _ in range(n)]
    if len(rows) == 1 or len(cols) == 1:
        # a point mass on either side forces the coupling
        for r, c in cells:
            plan[r][c] = row_marginal[r] * col_marginal[c]
    else:
        constraints: List[Constraint] = []
        for r in rows:
            constraints.append(Constraint(
                coefficients=tuple(ONE if rr == r else ZERO for rr, _ in cells),
                relation=Relation.EQ,
                rhs=row_marginal[r],
            ))
        for c in cols:
            constraints.append(Constraint(
                coefficients=tuple(ONE if cc == c else ZERO for _, cc in cells),
                relation=Relation.EQ,
                rhs=col_marginal[c],
            ))
        lp = LinearProgram(
            objective=tuple(cost[r][c] for r, c in cells),
            sense=Sense.MIN,
            constraints=tuple(constraints),
        )
        outcome = lp_solve(lp)
        if outcome.status != LpStatus.OPTIMAL:
            raise MarginalError(f"transport problem reported {outcome.status.value}")
        for (r, c), mass in zip(cells, outcome.solution):
            plan[r][c] = mass

    coupling = Coupling(plan=plan, row_marginal=row_marginal, col_marginal=col_marginal)
    return coupling.cost(cost), coupling


def northwest_corner(row_marginal: Sequence[Fraction], col_marginal: Sequence[Fraction]) -> Coupling:
    """Greedy feasible coupling filling cells from the top-left corner."""
    _check_marginal("row", row_marginal)
    _check_marginal("column", col_marginal)
    n = len(row_marginal)
    plan = [[ZERO] * n for _ in range(n)]
    supply = list(row_marginal)
    demand = list(col_marginal)
    r = c = 0
    while r < n and c < n:
        mass = min(supply[r], demand[c])
        plan[r][c] += mass
        supply[r] -= mass
        demand[c] -= mass
        if supply[r] == 0:
            r += 1
        else:
            c += 1
    return Coupling(plan=plan, row_marginal=row_marginal, col_marginal=col_marginal)
