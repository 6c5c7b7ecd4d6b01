"""
First-order sentences over the reals whose truth decides d(s_i0, s_j0) <= m.

    exists d . pseudo(d) & post_fixed(d) & d_i0j0 <= m

is true iff the undiscounted distance is at most m, because that distance is
the greatest post-fixed point of the functional. This module builds the
sentence, simplifies it with known distances, and renders it for external
solvers (SMT-LIB and Mathematica).
"""
import logging
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from models.errors import KnownDistanceConflict
from models.formulas import (
    FALSE,
    TRUE,
    And,
    Atom,
    BoolConst,
    Bounds,
    Comparison,
    Const,
    DistanceSentence,
    Exists,
    FOFormula,
    Or,
    Product,
    Sum,
    Term,
    Var,
    VarFamily,
)
from models.schemas import PTS, FrozenModel, KnownDistances

logger = logging.getLogger(__name__)

ZERO = Fraction(0)
ONE = Fraction(1)

PSEUDO_TAG = "pseudo"
POST_FIXED_TAG = "post-fixed"
CHECKED_TAGS = (PSEUDO_TAG, POST_FIXED_TAG)


def _d(i: int, j: int, wide: bool) -> Var:
    return Var(family=VarFamily.D, index=(i, j), wide=wide)


def _u(i0: int, j0: int, i: int, j: int, wide: bool) -> Var:
    return Var(family=VarFamily.U, index=(i0, j0, i, j), wide=wide)


def _const(value) -> Const:
    return Const(value=value)


def build_pseudo(n: int) -> And:
    """
    Range, zero diagonal, symmetry and all n^3 triangle inequalities over d.

    Args:
        n: Number of states

    Returns:
        Conjunction tagged `pseudo`
    """
    wide = n >= 10
    items: List[FOFormula] = []
    for i in range(n):
        for j in range(n):
            items.append(Bounds(lower=_const(0), term=_d(i, j, wide), upper=_const(1)))
    for i in range(n):
        items.append(Atom(op=Comparison.EQ, left=_d(i, i, wide), right=_const(0)))
    for i in range(n):
        for j in range(i + 1, n):
            items.append(Atom(op=Comparison.EQ, left=_d(i, j, wide), right=_d(j, i, wide)))
    for h in range(n):
        for i in range(n):
            for j in range(n):
                items.append(Atom(
                    op=Comparison.LE,
                    left=_d(h, j, wide),
                    right=Sum(terms=(_d(h, i, wide), _d(i, j, wide))),
                ))
    return And(items=tuple(items), tag=PSEUDO_TAG)


def _coupling_block(pts: PTS, i0: int, j0: int, wide: bool) -> Exists:
    """Existential coupling block: column sums pi(i0,.), row sums pi(j0,.), cost <= d_i0j0."""
    n = pts.n_states
    mu = [[_u(i0, j0, i, j, wide) for j in range(n)] for i in range(n)]
    items: List[FOFormula] = []
    for i in range(n):
        for j in range(n):
            items.append(Bounds(lower=_const(0), term=mu[i][j], upper=_const(1)))
    for j in range(n):
        items.append(Atom(
            op=Comparison.EQ,
            left=Sum(terms=tuple(mu[i][j] for i in range(n))),
            right=_const(pts.pi[i0][j]),
        ))
    for i in range(n):
        items.append(Atom(
            op=Comparison.EQ,
            left=Sum(terms=tuple(mu[i][j] for j in range(n))),
            right=_const(pts.pi[j0][i]),
        ))
    cost = Sum(terms=tuple(
        Product(factors=(_d(i, j, wide), mu[i][j])) for i in range(n) for j in range(n)
    ))
    items.append(Atom(op=Comparison.LE, left=cost, right=_d(i0, j0, wide)))
    return Exists(
        variables=tuple(mu[i][j] for i in range(n) for j in range(n)),
        body=And(items=tuple(items)),
        block=(i0, j0),
    )


def build_post_fixed(pts: PTS) -> And:
    """
    One conjunct per ordered pair, chosen by the live/stuck case.

    The guards on the rows of pi are decided here, not emitted: both stuck
    leaves 0 <= d, live against stuck leaves 1 <= d, both live opens a
    coupling block.
    """
    n = pts.n_states
    wide = n >= 10
    items: List[FOFormula] = []
    for i0 in range(n):
        for j0 in range(n):
            live_i, live_j = pts.is_live(i0), pts.is_live(j0)
            if live_i and live_j:
                items.append(_coupling_block(pts, i0, j0, wide))
            elif not live_i and not live_j:
                items.append(Atom(op=Comparison.LE, left=_const(0), right=_d(i0, j0, wide)))
            else:
                items.append(Atom(op=Comparison.LE, left=_const(1), right=_d(i0, j0, wide)))
    return And(items=tuple(items), tag=POST_FIXED_TAG)


def build_sentence(pts: PTS, i0: int, j0: int, m) -> DistanceSentence:
    """exists d . pseudo(d) & post_fixed(d) & d_i0j0 <= m"""
    n = pts.n_states
    wide = n >= 10
    m = _const(m).value
    body = And(items=(
        build_pseudo(n),
        build_post_fixed(pts),
        Atom(op=Comparison.LE, left=_d(i0, j0, wide), right=_const(m)),
    ))
    variables = tuple(_d(i, j, wide) for i in range(n) for j in range(n))
    return DistanceSentence(
        pts=pts,
        pair=(i0, j0),
        bound=m,
        formula=Exists(variables=variables, body=body),
    )


# Simplification


def _flip(op: Comparison) -> Comparison:
    return {
        Comparison.LE: Comparison.GE,
        Comparison.LT: Comparison.GT,
        Comparison.GE: Comparison.LE,
        Comparison.GT: Comparison.LT,
        Comparison.EQ: Comparison.EQ,
    }[op]


def _holds(op: Comparison, value: Fraction) -> bool:
    """value op 0"""
    return {
        Comparison.LE: value <= 0,
        Comparison.LT: value < 0,
        Comparison.EQ: value == 0,
        Comparison.GE: value >= 0,
        Comparison.GT: value > 0,
    }[op]


def _linear(term: Term) -> Optional[Tuple[Dict[Var, Fraction], Fraction]]:
    """Coefficients and constant when the term is linear, else None."""
    if isinstance(term, Const):
        return {}, term.value
    if isinstance(term, Var):
        return {term: ONE}, ZERO
    if isinstance(term, Sum):
        coefficients: Dict[Var, Fraction] = {}
        constant = ZERO
        for part in term.terms:
            linear = _linear(part)
            if linear is None:
                return None
            for var, coef in linear[0].items():
                coefficients[var] = coefficients.get(var, ZERO) + coef
            constant += linear[1]
        return coefficients, constant
    if isinstance(term, Product):
        scale = ONE
        var = None
        for factor in term.factors:
            if isinstance(factor, Const):
                scale *= factor.value
            elif isinstance(factor, Var) and var is None:
                var = factor
            else:
                return None
        return ({var: scale} if var is not None else {}), (ZERO if var is not None else scale)
    return None


class FormulaSimplifier:
    """
    Rewrites a sentence using facts that hold of the true distance:
    d_ii = 0, d_ij = d_ji, the known exact distances, and mu = 0 wherever the
    matching row of pi has no mass.
    """

    def __init__(self, known: KnownDistances, pts: PTS):
        self.known = known
        self.pts = pts

    def var(self, v: Var) -> Term:
        if v.family == VarFamily.D:
            i, j = v.index
            value = self.known.get(i, j)
            if value is not None:
                return _const(value)
            if i > j:
                return Var(family=v.family, index=(j, i), wide=v.wide)
            return v
        i0, j0, i, j = v.index
        if not self.pts.pi[i0][j] or not self.pts.pi[j0][i]:
            return _const(0)
        return v

    def term(self, t: Term) -> Term:
        if isinstance(t, Const):
            return t
        if isinstance(t, Var):
            return self.var(t)
        if isinstance(t, Sum):
            parts: List[Term] = []
            constant = ZERO
            for part in (self.term(p) for p in t.terms):
                nested = part.terms if isinstance(part, Sum) else (part,)
                for piece in nested:
                    if isinstance(piece, Const):
                        constant += piece.value
                    else:
                        parts.append(piece)
            if constant or not parts:
                parts.append(_const(constant))
            return parts[0] if len(parts) == 1 else Sum(terms=tuple(parts))
        factors: List[Term] = []
        scale = ONE
        for part in (self.term(f) for f in t.factors):
            nested = part.factors if isinstance(part, Product) else (part,)
            for piece in nested:
                if isinstance(piece, Const):
                    scale *= piece.value
                else:
                    factors.append(piece)
        if scale == 0 or not factors:
            return _const(scale)
        if scale != ONE:
            factors.insert(0, _const(scale))
        return factors[0] if len(factors) == 1 else Product(factors=tuple(factors))

    def atom(self, atom: Atom) -> FOFormula:
        left, right = self.term(atom.left), self.term(atom.right)
        op = atom.op
        if left == right:
            return TRUE if op in (Comparison.LE, Comparison.EQ, Comparison.GE) else FALSE
        lin_left, lin_right = _linear(left), _linear(right)
        if lin_left is None or lin_right is None:
            return Atom(op=op, left=left, right=right)

        coefficients = dict(lin_left[0])
        for var, coef in lin_right[0].items():
            coefficients[var] = coefficients.get(var, ZERO) - coef
        coefficients = {v: c for v, c in coefficients.items() if c}
        constant = lin_left[1] - lin_right[1]

        if not coefficients:
            return TRUE if _holds(op, constant) else FALSE
        if len(coefficients) > 1:
            return Atom(op=op, left=left, right=right)

        # one variable: a*v + constant op 0  ->  v op' c
        (var, a), = coefficients.items()
        c = -constant / a
        if a < 0:
            op = _flip(op)
        if op == Comparison.EQ:
            return Atom(op=op, left=var, right=_const(c))
        # both families are range-constrained to [0,1]
        if (op == Comparison.GE and c <= 0) or (op == Comparison.GT and c < 0):
            return TRUE
        if (op == Comparison.LE and c >= 1) or (op == Comparison.LT and c > 1):
            return TRUE
        if op in (Comparison.GE, Comparison.GT):
            return Atom(op=_flip(op), left=_const(c), right=var)
        return Atom(op=op, left=var, right=_const(c))

    def bounds(self, b: Bounds) -> FOFormula:
        lower, term, upper = self.term(b.lower), self.term(b.term), self.term(b.upper)
        if isinstance(lower, Const) and isinstance(term, Const) and isinstance(upper, Const):
            return TRUE if lower.value <= term.value <= upper.value else FALSE
        return Bounds(lower=lower, term=term, upper=upper)

    def formula(self, f: FOFormula) -> FOFormula:
        if isinstance(f, BoolConst):
            return f
        if isinstance(f, Atom):
            return self.atom(f)
        if isinstance(f, Bounds):
            return self.bounds(f)
        if isinstance(f, And):
            return self.conjunction(f)
        if isinstance(f, Or):
            items: List[FOFormula] = []
            for item in (self.formula(i) for i in f.items):
                if item == TRUE:
                    return TRUE
                if item != FALSE and item not in items:
                    items.append(item)
            if not items:
                return FALSE
            return items[0] if len(items) == 1 else Or(items=tuple(items), tag=f.tag)
        return self.exists(f)

    def conjunction(self, f: And) -> FOFormula:
        items: List[FOFormula] = []
        for original in f.items:
            item = self.formula(original)
            if item == FALSE:
                if f.tag in CHECKED_TAGS:
                    raise KnownDistanceConflict(render_infix(original))
                return FALSE
            if item == TRUE:
                continue
            nested = item.items if isinstance(item, And) and item.tag is None else (item,)
            for piece in nested:
                if piece not in items:
                    items.append(piece)
        if not items:
            return TRUE
        return And(items=tuple(items), tag=f.tag)

    def exists(self, f: Exists) -> FOFormula:
        if f.block is not None and self.known.is_known(*f.block):
            return TRUE
        body = self.formula(f.body)
        if isinstance(body, BoolConst):
            return body
        used = set(_occurring(body))
        variables = tuple(v for v in f.variables if v in used)
        if not variables:
            return body
        return Exists(variables=variables, body=body, block=f.block)


def _term_vars(t: Term):
    if isinstance(t, Var):
        yield t
    elif isinstance(t, Sum):
        for part in t.terms:
            yield from _term_vars(part)
    elif isinstance(t, Product):
        for part in t.factors:
            yield from _term_vars(part)


def _occurring(f: FOFormula):
    """Variables occurring free or bound in f, in traversal order."""
    if isinstance(f, Atom):
        yield from _term_vars(f.left)
        yield from _term_vars(f.right)
    elif isinstance(f, Bounds):
        for t in (f.lower, f.term, f.upper):
            yield from _term_vars(t)
    elif isinstance(f, (And, Or)):
        for item in f.items:
            yield from _occurring(item)
    elif isinstance(f, Exists):
        yield from _occurring(f.body)


def simplify(formula: FOFormula, known: KnownDistances, pts: PTS) -> FOFormula:
    """
    Apply diagonal/symmetry substitution, known distances and zero couplings,
    then fold constants, single-variable ranges and duplicates.

    Args:
        formula: Sentence built by this module
        known: Exact distances only
        pts: The system the sentence was built for

    Returns:
        An equivalent, smaller sentence

    Raises:
        KnownDistanceConflict: when a pseudo or post-fixed conjunct folds to false
    """
    result = FormulaSimplifier(known, pts).formula(formula)
    logger.debug(f"simplify: {len(variable_summary(result).d_variables)} d-variables remain")
    return result


def simplify_sentence(sentence: DistanceSentence, known: KnownDistances) -> DistanceSentence:
    return DistanceSentence(
        pts=sentence.pts,
        pair=sentence.pair,
        bound=sentence.bound,
        formula=simplify(sentence.formula, known, sentence.pts),
        simplified=True,
    )


class VariableSummary(FrozenModel):
    d_variables: Tuple[str, ...] = ()
    mu_blocks: Tuple[Tuple[str, ...], ...] = ()


def variable_summary(formula: FOFormula) -> VariableSummary:
    """Quantified d-variables and the coupling blocks, in traversal order."""
    d_variables: List[str] = []
    mu_blocks: List[Tuple[str, ...]] = []
    for block in _exists_blocks(formula):
        names = tuple(v.name for v in block.variables if v.family == VarFamily.U)
        if names:
            mu_blocks.append(names)
        d_variables.extend(v.name for v in block.variables if v.family == VarFamily.D)
    return VariableSummary(d_variables=tuple(d_variables), mu_blocks=tuple(mu_blocks))


def _exists_blocks(f: FOFormula):
    if isinstance(f, Exists):
        yield f
        yield from _exists_blocks(f.body)
    elif isinstance(f, (And, Or)):
        for item in f.items:
            yield from _exists_blocks(item)


# Rendering

_SMT_OPS = {
    Comparison.LE: "<=", Comparison.LT: "<", Comparison.EQ: "=",
    Comparison.GE: ">=", Comparison.GT: ">",
}
_MMA_OPS = {
    Comparison.LE: "<=", Comparison.LT: "<", Comparison.EQ: "==",
    Comparison.GE: ">=", Comparison.GT: ">",
}


def _smt_const(value: Fraction) -> str:
    magnitude = abs(value)
    text = str(magnitude.numerator) if magnitude.denominator == 1 else f"(/ {magnitude.numerator} {magnitude.denominator})"
    return f"(- {text})" if value < 0 else text


def _smt_term(t: Term) -> str:
    if isinstance(t, Const):
        return _smt_const(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Sum):
        return "(+ " + " ".join(_smt_term(p) for p in t.terms) + ")"
    return "(* " + " ".join(_smt_term(p) for p in t.factors) + ")"


def _smt_formula(f: FOFormula) -> str:
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"({_SMT_OPS[f.op]} {_smt_term(f.left)} {_smt_term(f.right)})"
    if isinstance(f, Bounds):
        term = _smt_term(f.term)
        return f"(and (<= {_smt_term(f.lower)} {term}) (<= {term} {_smt_term(f.upper)}))"
    if isinstance(f, Exists):
        # prenexed: every variable is declared at top level
        return _smt_formula(f.body)
    keyword = "and" if isinstance(f, And) else "or"
    if not f.items:
        return "true" if keyword == "and" else "false"
    return f"({keyword} " + " ".join(_smt_formula(i) for i in f.items) + ")"


def emit_smtlib(formula: FOFormula) -> str:
    """
    SMT-LIB script over nonlinear real arithmetic.

    All quantifiers are existential with distinct names, so they are
    prenexed into constant declarations.
    """
    lines = ["(set-logic QF_NRA)"]
    seen = set()
    for block in _exists_blocks(formula):
        for var in block.variables:
            if var.name not in seen:
                seen.add(var.name)
                lines.append(f"(declare-const {var.name} Real)")
    lines.append(f"(assert {_smt_formula(formula)})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


def _mma_const(value: Fraction) -> str:
    text = str(abs(value))
    return f"(-{text})" if value < 0 else text


def _mma_term(t: Term) -> str:
    if isinstance(t, Const):
        return _mma_const(t.value)
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Sum):
        return " + ".join(_mma_term(p) for p in t.terms)
    return "*".join(f"({_mma_term(p)})" if isinstance(p, Sum) else _mma_term(p) for p in t.factors)


def render_infix(f: FOFormula) -> str:
    """Mathematica-style infix rendering of a formula."""
    if isinstance(f, BoolConst):
        return "True" if f.value else "False"
    if isinstance(f, Atom):
        return f"{_mma_term(f.left)} {_MMA_OPS[f.op]} {_mma_term(f.right)}"
    if isinstance(f, Bounds):
        return f"{_mma_term(f.lower)} <= {_mma_term(f.term)} <= {_mma_term(f.upper)}"
    if isinstance(f, Exists):
        names = ", ".join(v.name for v in f.variables)
        return f"Exists[{{{names}}}, {render_infix(f.body)}]"
    joiner = " && " if isinstance(f, And) else " || "
    if not f.items:
        return "True" if isinstance(f, And) else "False"
    parts = [
        f"({render_infix(i)})" if isinstance(i, (And, Or)) else render_infix(i)
        for i in f.items
    ]
    return joiner.join(parts)


def emit_mathematica(formula: FOFormula) -> str:
    """`Reduce[Exists[{...}, ...], Reals]` with exact p/q constants."""
    return f"Reduce[{render_infix(formula)}, Reals]\n"
