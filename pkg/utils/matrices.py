"""
Small helpers over square rational matrices (tuples of tuples of Fraction).
"""
from fractions import Fraction
from typing import List, Sequence, Tuple

import sympy

from models.errors import SingularSystemError
from models.schemas import DistanceMatrix
from utils.rationals import floor_to_grid, from_sympy, to_sympy

ZERO = Fraction(0)
ONE = Fraction(1)


def freeze(rows: Sequence[Sequence[Fraction]]) -> Tuple[Tuple[Fraction, ...], ...]:
    return tuple(tuple(row) for row in rows)


def metric_closure(d: DistanceMatrix) -> DistanceMatrix:
    """
    Largest pseudometric below d: shortest-path (Floyd-Warshall) closure.

    Entries only ever decrease, so the closure of a lower bound is still a
    lower bound.
    """
    n = d.size
    dist = [list(row) for row in d.values]
    for k in range(n):
        row_k = dist[k]
        for i in range(n):
            via = dist[i][k]
            if via >= ONE:
                continue
            row_i = dist[i]
            for j in range(n):
                candidate = via + row_k[j]
                if candidate < row_i[j]:
                    row_i[j] = candidate
    return DistanceMatrix(values=freeze(dist))


def max_gap(lower: DistanceMatrix, upper: DistanceMatrix) -> Fraction:
    """Largest upper - lower over all entries (0 for a 1x1 matrix)."""
    return max(
        (u - l for rl, ru in zip(lower.values, upper.values) for l, u in zip(rl, ru)),
        default=ZERO,
    )


def inflate(d: DistanceMatrix, c: Fraction) -> DistanceMatrix:
    """min(1, d + c) off the diagonal; adding a constant keeps triangles."""
    n = d.size
    return DistanceMatrix(values=freeze(
        [[ZERO if i == j else min(ONE, d.values[i][j] + c) for j in range(n)] for i in range(n)]
    ))


def round_down(d: DistanceMatrix, denominator: int) -> DistanceMatrix:
    """Floor every entry to the 1/denominator grid, then repair triangles."""
    floored = [[floor_to_grid(v, denominator) for v in row] for row in d.values]
    return metric_closure(DistanceMatrix(values=freeze(floored)))


def lift(d: DistanceMatrix, projection: Sequence[int]) -> DistanceMatrix:
    """Pull a matrix over blocks back to the original states."""
    return DistanceMatrix(values=freeze(
        [[d.values[projection[i]][projection[j]] for j in range(len(projection))]
         for i in range(len(projection))]
    ))


def solve_exact(a: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> List[Fraction]:
    """
    Unique solution of a x = b by rational Gauss-Jordan elimination.

    Raises:
        SingularSystemError: when the system has no solution or infinitely many
    """
    if not b:
        return []
    lhs = sympy.Matrix([[to_sympy(v) for v in row] for row in a])
    rhs = sympy.Matrix([to_sympy(v) for v in b])
    try:
        solution, params = lhs.gauss_jordan_solve(rhs)
    except ValueError as e:
        raise SingularSystemError(f"linear system has no solution: {e}")
    if params.shape[0]:
        raise SingularSystemError(f"linear system has {params.shape[0]} free parameters")
    return [from_sympy(v) for v in solution]
