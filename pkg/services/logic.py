"""
Real-valued modal logic: parsing, interpretation and random generation.

Formulas only ever give lower bounds on distances; the engine never
enumerates them to compute a distance.

Syntax:
    conj  := minus ('&' minus)*
    minus := unary ('-' RAT)*
    unary := '<>' unary | '!' unary | atom
    atom  := 'true' | '(' conj ')'
"""
import logging
import random
import re
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from models.errors import FormulaSyntaxError
from models.formulas import Formula, FormulaKind
from models.schemas import PTS, Valuation
from utils.rationals import parse_rational, rational_grid

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

# denominators of the constants drawn by random_formula
Q_GRID = rational_grid(8)

_TOKEN = re.compile(r"\s*(<>|true|!|&|-|\(|\)|\d+(?:/\d+)?)")


def _tokenize(text: str) -> List[Tuple[str, int]]:
    tokens = []
    position = 0
    while position < len(text):
        if text[position:].strip() == "":
            break
        match = _TOKEN.match(text, position)
        if not match:
            offset = len(text[position:]) - len(text[position:].lstrip())
            raise FormulaSyntaxError(position + offset, f"unexpected character {text[position + offset]!r}")
        tokens.append((match.group(1), match.start(1)))
        position = match.end()
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> Optional[str]:
        return self.tokens[self.index][0] if self.index < len(self.tokens) else None

    def position(self) -> int:
        return self.tokens[self.index][1] if self.index < len(self.tokens) else len(self.text)

    def take(self, expected: Optional[str] = None) -> str:
        token = self.peek()
        if token is None or (expected is not None and token != expected):
            wanted = f"'{expected}'" if expected else "a token"
            raise FormulaSyntaxError(self.position(), f"expected {wanted}, found {token or 'end of input'}")
        self.index += 1
        return token

    def conj(self) -> Formula:
        left = self.minus()
        while self.peek() == "&":
            self.take("&")
            left = Formula.conj(left, self.minus())
        return left

    def minus(self) -> Formula:
        operand = self.unary()
        while self.peek() == "-":
            self.take("-")
            at = self.position()
            token = self.take()
            try:
                q = parse_rational(token)
            except ValueError:
                raise FormulaSyntaxError(at, f"expected a rational after '-', found {token}")
            if not ZERO <= q <= ONE:
                raise FormulaSyntaxError(at, f"constant {token} is outside [0,1]")
            operand = Formula.minus(operand, q)
        return operand

    def unary(self) -> Formula:
        token = self.peek()
        if token == "<>":
            self.take()
            return Formula.diamond(self.unary())
        if token == "!":
            self.take()
            return Formula.neg(self.unary())
        if token == "true":
            self.take()
            return Formula.true()
        if token == "(":
            self.take()
            inner = self.conj()
            self.take(")")
            return inner
        raise FormulaSyntaxError(self.position(), f"unexpected {token or 'end of input'}")


def parse_formula(text: str) -> Formula:
    """
    Parse the textual syntax, e.g. `<> true & ! <> <> true - 1/2`.

    Raises:
        FormulaSyntaxError: with the column of the offending token
    """
    parser = _Parser(text)
    formula = parser.conj()
    if parser.peek() is not None:
        raise FormulaSyntaxError(parser.position(), f"unexpected {parser.peek()}")
    return formula


def interpret(pts: PTS, formula: Formula, delta: Fraction) -> Valuation:
    """
    Value of a formula at every state.

    Args:
        pts: The transition system
        formula: The formula
        delta: Discount applied at each diamond

    Returns:
        Valuation with entries in [0,1]
    """
    return Valuation(values=tuple(_evaluate(pts, formula, delta)))


def _evaluate(pts: PTS, formula: Formula, delta: Fraction) -> List[Fraction]:
    kind = formula.kind
    if kind == FormulaKind.TRUE:
        return [ONE] * pts.n_states
    inner = _evaluate(pts, formula.children[0], delta)
    if kind == FormulaKind.DIAMOND:
        return [
            delta * sum((p * inner[t] for t, p in enumerate(row) if p), ZERO)
            for row in pts.pi
        ]
    if kind == FormulaKind.NOT:
        return [ONE - v for v in inner]
    if kind == FormulaKind.MINUS:
        return [max(v - formula.q, ZERO) for v in inner]
    right = _evaluate(pts, formula.children[1], delta)
    return [min(a, b) for a, b in zip(inner, right)]


def depth(formula: Formula) -> int:
    """Modal depth: diamonds add one, conjunction takes the max."""
    if formula.kind == FormulaKind.TRUE:
        return 0
    if formula.kind == FormulaKind.DIAMOND:
        return depth(formula.children[0]) + 1
    return max(depth(child) for child in formula.children)


def logical_lower_bound(pts: PTS, formulas: Iterable[Formula], i: int, j: int, delta: Fraction) -> Fraction:
    """Largest |[[f]](s_i) - [[f]](s_j)| over the formulas; a lower bound on the distance."""
    best = None
    for formula in formulas:
        values = interpret(pts, formula, delta)
        gap = abs(values[i] - values[j])
        best = gap if best is None or gap > best else best
    if best is None:
        raise ValueError("at least one formula is required")
    return best


def random_formula(seed: int, max_depth: int, max_size: int = 8) -> Formula:
    """
    Deterministic random formula with modal depth at most max_depth.

    Constants are drawn from the rationals in [0,1] with denominator <= 8.
    """
    rng = random.Random(seed)

    def build(depth_left: int, size: int) -> Formula:
        if size <= 0:
            return Formula.true()
        choices = ["true", "not", "and", "minus"]
        if depth_left > 0:
            choices += ["diamond", "diamond"]
        kind = rng.choice(choices)
        if kind == "true":
            return Formula.true()
        if kind == "diamond":
            return Formula.diamond(build(depth_left - 1, size - 1))
        if kind == "not":
            return Formula.neg(build(depth_left, size - 1))
        if kind == "minus":
            return Formula.minus(build(depth_left, size - 1), rng.choice(Q_GRID))
        half = (size - 1) // 2
        return Formula.conj(build(depth_left, half), build(depth_left, size - 1 - half))

    return build(max_depth, max_size)
