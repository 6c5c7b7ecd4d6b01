"""
Exact two-phase simplex over fractions.Fraction with Bland's pivot rule.

The tableau is dense. Bland's rule (smallest entering index, ratio ties
broken by smallest basic index) keeps degenerate problems from cycling.
"""
import logging
from fractions import Fraction
from typing import List, Optional, Sequence, Set, Tuple

from models.errors import DimensionError
from models.schemas import (
    Constraint,
    LinearProgram,
    LpOutcome,
    LpStatus,
    Relation,
    Sense,
)

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)


class SimplexTableau:
    """Rows A | b with one basic column per row."""

    def __init__(self, rows: List[List[Fraction]], rhs: List[Fraction], basis: List[int], width: int):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.width = width
        self.pivots = 0

    @property
    def n_columns(self) -> int:
        return self.width

    def pivot(self, r: int, c: int) -> None:
        row = self.rows[r]
        piv = row[c]
        if piv != ONE:
            self.rows[r] = row = [v / piv for v in row]
            self.rhs[r] /= piv
        for k, other in enumerate(self.rows):
            if k == r:
                continue
            factor = other[c]
            if factor:
                self.rows[k] = [a - factor * b for a, b in zip(other, row)]
                self.rhs[k] -= factor * self.rhs[r]
        self.basis[r] = c
        self.pivots += 1

    def reduced_costs(self, cost: Sequence[Fraction]) -> List[Fraction]:
        reduced = list(cost)
        for r, b in enumerate(self.basis):
            cb = cost[b]
            if cb:
                reduced = [rc - cb * a for rc, a in zip(reduced, self.rows[r])]
        return reduced

    def objective(self, cost: Sequence[Fraction]) -> Fraction:
        return sum((cost[b] * self.rhs[r] for r, b in enumerate(self.basis)), ZERO)

    def minimize(self, cost: Sequence[Fraction], allowed: Set[int]) -> LpStatus:
        """Run primal simplex from the current feasible basis."""
        while True:
            reduced = self.reduced_costs(cost)
            entering = next(
                (j for j in range(self.n_columns) if j in allowed and reduced[j] < 0),
                None,
            )
            if entering is None:
                return LpStatus.OPTIMAL

            leaving: Optional[Tuple[Fraction, int, int]] = None
            for r, row in enumerate(self.rows):
                a = row[entering]
                if a > 0:
                    candidate = (self.rhs[r] / a, self.basis[r], r)
                    if leaving is None or candidate[:2] < leaving[:2]:
                        leaving = candidate
            if leaving is None:
                return LpStatus.UNBOUNDED
            self.pivot(leaving[2], entering)

    def solution(self, n: int) -> List[Fraction]:
        x = [ZERO] * n
        for r, b in enumerate(self.basis):
            if b < n:
                x[b] = self.rhs[r]
        return x


def _check_dimensions(lp: LinearProgram) -> None:
    n = lp.n_variables
    for index, constraint in enumerate(lp.constraints):
        if len(constraint.coefficients) != n:
            raise DimensionError(
                f"constraint {index + 1} has {len(constraint.coefficients)} coefficients, "
                f"expected {n}"
            )
    if lp.bounds is not None and len(lp.bounds) != n:
        raise DimensionError(f"{len(lp.bounds)} bounds given for {n} variables")


def _standard_rows(lp: LinearProgram) -> Tuple[List[Constraint], List[Fraction]]:
    """Shift variables by their lower bounds and turn upper bounds into rows."""
    n = lp.n_variables
    lower = [b.lower for b in lp.bounds] if lp.bounds else [ZERO] * n
    rows: List[Constraint] = []
    for constraint in lp.constraints:
        shift = sum((a * l for a, l in zip(constraint.coefficients, lower)), ZERO)
        rows.append(Constraint(
            coefficients=constraint.coefficients,
            relation=constraint.relation,
            rhs=constraint.rhs - shift,
        ))
    if lp.bounds:
        for k, bound in enumerate(lp.bounds):
            if bound.upper is not None:
                unit = tuple(ONE if j == k else ZERO for j in range(n))
                rows.append(Constraint(coefficients=unit, relation=Relation.LE, rhs=bound.upper - bound.lower))
    return rows, lower


def lp_solve(lp: LinearProgram) -> LpOutcome:
    """
    Solve a linear program exactly.

    Args:
        lp: Objective, constraints and variable bounds (default [0, inf))

    Returns:
        Outcome with the exact optimum and a primal solution when optimal

    Raises:
        DimensionError: when rows or bounds do not match the objective
    """
    _check_dimensions(lp)
    n = lp.n_variables
    constraints, lower = _standard_rows(lp)

    # Step 1: normalise to rhs >= 0 and lay out slack, surplus and artificial columns
    normalised = []
    for c in constraints:
        coefficients, relation, rhs = list(c.coefficients), c.relation, c.rhs
        if rhs < 0:
            coefficients = [-a for a in coefficients]
            rhs = -rhs
            relation = {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(relation, relation)
        normalised.append((coefficients, relation, rhs))

    n_slack = sum(1 for _, rel, _ in normalised if rel != Relation.EQ)
    n_artificial = sum(1 for _, rel, _ in normalised if rel != Relation.LE)
    width = n + n_slack + n_artificial
    first_artificial = n + n_slack

    rows: List[List[Fraction]] = []
    rhs: List[Fraction] = []
    basis: List[int] = []
    slack_col, art_col = n, first_artificial
    for coefficients, relation, b in normalised:
        row = coefficients + [ZERO] * (n_slack + n_artificial)
        if relation == Relation.LE:
            row[slack_col] = ONE
            basis.append(slack_col)
            slack_col += 1
        else:
            if relation == Relation.GE:
                row[slack_col] = -ONE
                slack_col += 1
            row[art_col] = ONE
            basis.append(art_col)
            art_col += 1
        rows.append(row)
        rhs.append(b)

    tableau = SimplexTableau(rows, rhs, basis, width)
    artificial = set(range(first_artificial, width))

    # Step 2: phase one drives the artificial variables to zero
    if artificial:
        phase_one = [ONE if j in artificial else ZERO for j in range(width)]
        tableau.minimize(phase_one, set(range(width)))
        if tableau.objective(phase_one) > 0:
            logger.debug("LP infeasible after phase one")
            return LpOutcome(status=LpStatus.INFEASIBLE)

        r = 0
        while r < len(tableau.basis):
            if tableau.basis[r] in artificial:
                column = next(
                    (j for j in range(first_artificial) if tableau.rows[r][j] != 0),
                    None,
                )
                if column is None:
                    # redundant row
                    del tableau.rows[r], tableau.rhs[r], tableau.basis[r]
                    continue
                tableau.pivot(r, column)
            r += 1

    # Step 3: phase two on the original objective
    sign = -ONE if lp.sense == Sense.MAX else ONE
    cost = [sign * c for c in lp.objective] + [ZERO] * (width - n)
    status = tableau.minimize(cost, set(range(first_artificial)))
    if status == LpStatus.UNBOUNDED:
        return LpOutcome(status=LpStatus.UNBOUNDED)

    shifted = tableau.solution(n)
    x = [v + l for v, l in zip(shifted, lower)]
    value = sum((c * v for c, v in zip(lp.objective, x)), ZERO)
    logger.debug(f"LP optimal after {tableau.pivots} pivots, value {value}")
    return LpOutcome(status=LpStatus.OPTIMAL, value=value, solution=tuple(x))
