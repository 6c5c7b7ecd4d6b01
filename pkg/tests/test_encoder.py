from fractions import Fraction as F

import pytest

from models.errors import KnownDistanceConflict
from models.formulas import And, Atom, Comparison, Const, Exists, Var, VarFamily
from models.schemas import PTS, KnownDistances
from services.encoder import (
    build_post_fixed,
    build_pseudo,
    build_sentence,
    emit_mathematica,
    emit_smtlib,
    render_infix,
    simplify,
    simplify_sentence,
    variable_summary,
)
from services.fixpoint import known_distances


def test_variable_names():
    assert Var(family=VarFamily.D, index=(0, 1)).name == "d12"
    assert Var(family=VarFamily.D, index=(0, 11), wide=True).name == "d1x12"
    assert Var(family=VarFamily.U, index=(0, 1, 2, 3)).name == "u12c34"


@pytest.mark.parametrize("n", [1, 2, 3])
def test_pseudo_has_every_law(n):
    pseudo = build_pseudo(n)
    assert pseudo.tag == "pseudo"
    assert len(pseudo.items) == n * n + n + n * (n - 1) // 2 + n ** 3


def test_post_fixed_cases(ex1):
    post = build_post_fixed(ex1)
    assert len(post.items) == 25
    blocks = [item for item in post.items if isinstance(item, Exists)]
    assert len(blocks) == 16
    assert Atom(op=Comparison.LE, left=Const(value=1), right=Var(family=VarFamily.D, index=(0, 3))) in post.items
    assert Atom(op=Comparison.LE, left=Const(value=0), right=Var(family=VarFamily.D, index=(3, 3))) in post.items


def test_simplified_example_sentence(ex1):
    sentence = simplify_sentence(build_sentence(ex1, 0, 1, F(1, 2)), known_distances(ex1, F(1)))
    summary = variable_summary(sentence.formula)
    assert summary.d_variables == ("d12",)
    assert len(summary.mu_blocks) == 2
    assert all(len(block) == 6 for block in summary.mu_blocks)
    text = render_infix(sentence.formula)
    assert "1/6 <= d12" in text
    assert "d12 <= 7/18" in text
    assert "d12 <= 1/2" in text


def test_smtlib_script(ex1):
    sentence = simplify_sentence(build_sentence(ex1, 0, 1, F(1, 2)), known_distances(ex1, F(1)))
    script = emit_smtlib(sentence.formula)
    lines = script.splitlines()
    assert lines[0] == "(set-logic QF_NRA)"
    assert lines[1] == "(declare-const d12 Real)"
    assert lines[-1] == "(check-sat)"
    assert sum(1 for line in lines if line.startswith("(declare-const u")) == 12
    assert "(/ 7 18)" in script
    assert script.endswith("\n")


def test_mathematica_script(ex1):
    sentence = simplify_sentence(build_sentence(ex1, 0, 1, F(1, 4)), known_distances(ex1, F(1)))
    script = emit_mathematica(sentence.formula)
    assert script.startswith("Reduce[Exists[{d12}, ")
    assert script.endswith(", Reals]\n")
    assert "d12 <= 1/4" in script


def test_unsimplified_sentence_declares_all_variables():
    pts = PTS.from_rows([[F(0), F(1)], [F(0), F(0)]])
    script = emit_smtlib(build_sentence(pts, 0, 1, F(1)).formula)
    assert script.count("(declare-const d") == 4


def test_conflicting_known_distances_are_reported():
    pts = PTS.from_rows([[F(1), F(0), F(0)], [F(0), F(1), F(0)], [F(0), F(0), F(1)]])
    known = KnownDistances(n_states=3, values={(0, 1): F(1), (0, 2): F(0), (1, 2): F(0)})
    with pytest.raises(KnownDistanceConflict, match="<="):
        simplify(build_sentence(pts, 0, 1, F(1)).formula, known, pts)


def test_fully_known_sentence_folds_to_a_constant():
    pts = PTS.from_rows([[F(0), F(1)], [F(0), F(0)]])
    known = known_distances(pts, F(1))
    assert simplify(build_sentence(pts, 0, 1, F(1)).formula, known, pts).value is True
    assert simplify(build_sentence(pts, 0, 1, F(1, 2)).formula, known, pts).value is False


def test_without_known_distances_only_structural_reductions_apply(ex1):
    formula = simplify(build_sentence(ex1, 0, 1, F(1, 2)).formula, KnownDistances(n_states=5), ex1)
    assert len(variable_summary(formula).d_variables) == 10


def test_emission_is_deterministic(ex1):
    known = known_distances(ex1, F(1))
    first = emit_smtlib(simplify_sentence(build_sentence(ex1, 0, 1, F(1, 2)), known).formula)
    second = emit_smtlib(simplify_sentence(build_sentence(ex1, 0, 1, F(1, 2)), known).formula)
    assert first == second
