"""
Exact rational helpers: parsing, rendering and small conversions.

Every number that flows through the engine is a fractions.Fraction. Decimal
strings are produced here for presentation only.
"""
import re
from decimal import Decimal, ROUND_HALF_EVEN, localcontext
from fractions import Fraction
from typing import List, Union

import sympy

RATIONAL_PATTERN = re.compile(r"^([+-]?\d+)(?:/(\d+))?$")

Number = Union[int, str, Fraction]


def parse_rational(text: str) -> Fraction:
    """
    Parse `p/q` or an integer literal into an exact rational.

    Decimal literals are rejected on purpose: 0.3333 is not 1/3.

    Args:
        text: The literal

    Returns:
        The rational in lowest terms
    """
    match = RATIONAL_PATTERN.match(text.strip())
    if not match:
        raise ValueError(f"not a rational literal (expected p/q or an integer): {text!r}")
    numerator = int(match.group(1))
    denominator = int(match.group(2)) if match.group(2) is not None else 1
    if denominator == 0:
        raise ValueError(f"zero denominator in {text!r}")
    return Fraction(numerator, denominator)


def to_fraction(value: Number) -> Fraction:
    """Coerce ints, Fractions and `p/q` strings; floats are refused."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    if isinstance(value, sympy.Rational):
        return Fraction(int(value.p), int(value.q))
    raise TypeError(f"cannot use {type(value).__name__} as an exact rational")


def format_rational(value: Fraction) -> str:
    """Always `p/q`, including `0/1` and `1/1`."""
    return f"{value.numerator}/{value.denominator}"


def format_compact(value: Fraction) -> str:
    """`p/q`, or the bare integer when the denominator is 1."""
    return str(value)


def format_decimal(value: Fraction, precision: int = 6) -> str:
    """Decimal expansion rounded half-even to `precision` places."""
    with localcontext() as ctx:
        ctx.prec = max(28, precision + len(str(abs(value.numerator))) + 2)
        quotient = Decimal(value.numerator) / Decimal(value.denominator)
        quantum = Decimal(1).scaleb(-precision)
        return str(quotient.quantize(quantum, rounding=ROUND_HALF_EVEN))


def render_rational(value: Fraction, precision: int = 6) -> str:
    """Human rendering, e.g. `23/72 (≈0.319444)`."""
    return f"{format_rational(value)} (≈{format_decimal(value, precision)})"


def to_sympy(value: Fraction) -> sympy.Rational:
    return sympy.Rational(value.numerator, value.denominator)


def from_sympy(value: sympy.Expr) -> Fraction:
    if not isinstance(value, sympy.Rational):
        raise ValueError(f"expected an exact rational, got {value}")
    return Fraction(int(value.p), int(value.q))


def rational_grid(max_denominator: int) -> List[Fraction]:
    """All rationals in [0,1] with denominator at most `max_denominator`, sorted."""
    values = {
        Fraction(p, q)
        for q in range(1, max_denominator + 1)
        for p in range(0, q + 1)
    }
    return sorted(values)


def floor_to_grid(value: Fraction, denominator: int) -> Fraction:
    """Largest multiple of 1/denominator that does not exceed value."""
    return Fraction((value.numerator * denominator) // value.denominator, denominator)
