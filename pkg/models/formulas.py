"""
Formula trees: the modal logic used as a lower-bound oracle, and the
first-order sentences over the reals that encode distance questions.
"""
from enum import Enum
from fractions import Fraction
from typing import Optional, Tuple, Union

from pydantic import model_validator

from models.schemas import PTS, FrozenModel, Pair, Rational

ZERO = Fraction(0)
ONE = Fraction(1)


# Modal logic


class FormulaKind(str, Enum):
    TRUE = "true"
    DIAMOND = "diamond"
    AND = "and"
    NOT = "not"
    MINUS = "minus"


_ARITY = {
    FormulaKind.TRUE: 0,
    FormulaKind.DIAMOND: 1,
    FormulaKind.AND: 2,
    FormulaKind.NOT: 1,
    FormulaKind.MINUS: 1,
}

# binding strength used when rendering
_LEVEL = {
    FormulaKind.AND: 0,
    FormulaKind.MINUS: 1,
    FormulaKind.DIAMOND: 2,
    FormulaKind.NOT: 2,
    FormulaKind.TRUE: 3,
}


class Formula(FrozenModel):
    """
    Node of a modal formula: true, <> f, f & g, ! f or f - q.

    Textual syntax (see services.logic.parse_formula) is produced by str().
    """
    kind: FormulaKind
    children: Tuple["Formula", ...] = ()
    q: Optional[Rational] = None

    @model_validator(mode="after")
    def _check_node(self) -> "Formula":
        if len(self.children) != _ARITY[self.kind]:
            raise ValueError(f"{self.kind.value} takes {_ARITY[self.kind]} operands")
        if self.kind == FormulaKind.MINUS:
            if self.q is None or not ZERO <= self.q <= ONE:
                raise ValueError("the subtracted constant must lie in [0,1]")
        elif self.q is not None:
            raise ValueError(f"{self.kind.value} does not take a constant")
        return self

    @classmethod
    def true(cls) -> "Formula":
        return cls(kind=FormulaKind.TRUE)

    @classmethod
    def diamond(cls, child: "Formula") -> "Formula":
        return cls(kind=FormulaKind.DIAMOND, children=(child,))

    @classmethod
    def conj(cls, left: "Formula", right: "Formula") -> "Formula":
        return cls(kind=FormulaKind.AND, children=(left, right))

    @classmethod
    def neg(cls, child: "Formula") -> "Formula":
        return cls(kind=FormulaKind.NOT, children=(child,))

    @classmethod
    def minus(cls, child: "Formula", q) -> "Formula":
        return cls(kind=FormulaKind.MINUS, children=(child,), q=q)

    def _render(self, level: int) -> str:
        if self.kind == FormulaKind.TRUE:
            text = "true"
        elif self.kind == FormulaKind.DIAMOND:
            text = "<> " + self.children[0]._render(2)
        elif self.kind == FormulaKind.NOT:
            text = "! " + self.children[0]._render(2)
        elif self.kind == FormulaKind.MINUS:
            text = f"{self.children[0]._render(1)} - {self.q}"
        else:
            text = f"{self.children[0]._render(0)} & {self.children[1]._render(1)}"
        return f"({text})" if _LEVEL[self.kind] < level else text

    def __str__(self) -> str:
        return self._render(0)


Formula.model_rebuild()


# First-order sentences over the reals


class VarFamily(str, Enum):
    D = "d"
    U = "u"


class Var(FrozenModel):
    """
    Real variable. d-variables are indexed (i, j); coupling variables
    (i0, j0, i, j) belong to the block of pair (i0, j0). Indices are 0-based;
    names are 1-based.
    """
    family: VarFamily
    index: Tuple[int, ...]
    wide: bool = False

    @property
    def name(self) -> str:
        sep = "x" if self.wide else ""
        if self.family == VarFamily.D:
            i, j = self.index
            return f"d{i + 1}{sep}{j + 1}"
        i0, j0, i, j = self.index
        return f"u{i0 + 1}{sep}{j0 + 1}c{i + 1}{sep}{j + 1}"


class Const(FrozenModel):
    value: Rational


class Sum(FrozenModel):
    terms: Tuple["Term", ...]


class Product(FrozenModel):
    factors: Tuple["Term", ...]


Term = Union[Const, Var, Sum, Product]


class Comparison(str, Enum):
    LE = "<="
    LT = "<"
    EQ = "="
    GE = ">="
    GT = ">"


class Atom(FrozenModel):
    op: Comparison
    left: Term
    right: Term


class Bounds(FrozenModel):
    """Chained lower <= term <= upper."""
    lower: Term
    term: Term
    upper: Term


class BoolConst(FrozenModel):
    value: bool


class And(FrozenModel):
    items: Tuple["FOFormula", ...]
    tag: Optional[str] = None


class Or(FrozenModel):
    items: Tuple["FOFormula", ...]
    tag: Optional[str] = None


class Exists(FrozenModel):
    variables: Tuple[Var, ...]
    body: "FOFormula"
    block: Optional[Pair] = None


FOFormula = Union[Atom, Bounds, And, Or, Exists, BoolConst]

TRUE = BoolConst(value=True)
FALSE = BoolConst(value=False)

for _model in (Sum, Product, Atom, Bounds, And, Or, Exists):
    _model.model_rebuild()


class DistanceSentence(FrozenModel):
    """The sentence asking whether the distance of `pair` is at most `bound`."""
    pts: PTS
    pair: Pair
    bound: Rational
    formula: FOFormula
    simplified: bool = False
