import os
import sys
from fractions import Fraction as F

import pytest

from models.errors import OracleError
from models.schemas import DecisionOutcome, IntervalMethod, OracleConfig, OracleKind, Provenance
from services.encoder import build_sentence
from services.oracle import ExternalOracle, InternalOracle, approximate_pair, decide


def fake_solver(tmp_path, output):
    script = tmp_path / "solver.py"
    script.write_text(f"import sys\nprint({output!r})\n")
    return f"{sys.executable} {script}"


@pytest.mark.parametrize("m, outcome", [
    (F(1, 2), DecisionOutcome.TRUE),
    (F(1, 4), DecisionOutcome.FALSE),
    (F(23, 72), DecisionOutcome.TRUE),
])
def test_internal_decisions_on_example(ex1, m, outcome):
    decision = decide(build_sentence(ex1, 0, 1, m))
    assert decision.outcome == outcome
    assert decision.provenance == Provenance.INTERNAL


def test_bisection_with_internal_oracle(ex1):
    interval = approximate_pair(ex1, 0, 1, F(1, 8))
    assert interval.method == IntervalMethod.BISECTION
    assert interval.lower <= F(23, 72) <= interval.upper
    assert interval.upper - interval.lower <= F(1, 8)
    assert [step.bound for step in interval.steps] == [F(1, 2), F(1, 4), F(3, 8)]


def test_internal_oracle_caches_bounds(ex1):
    oracle = InternalOracle(epsilon=F(1, 100))
    oracle.decide(build_sentence(ex1, 0, 1, F(1, 2)))
    oracle.decide(build_sentence(ex1, 0, 2, F(1, 2)))
    assert len(oracle._cache) == 1


def test_oracle_spec_parsing():
    assert OracleConfig.parse("internal").kind == OracleKind.INTERNAL
    config = OracleConfig.parse("cmd:z3 -smt2 {script}", timeout=5)
    assert config.command == "z3 -smt2 {script}"
    assert ExternalOracle(config).command_for("/tmp/a b.smt2") == ["z3", "-smt2", "/tmp/a b.smt2"]
    assert ExternalOracle(OracleConfig.parse("cmd:z3")).command_for("x.smt2") == ["z3", "x.smt2"]
    with pytest.raises(ValueError):
        OracleConfig.parse("z3")


def test_external_verdicts(ex1, tmp_path):
    scripts = tmp_path / "scripts"
    scripts.mkdir()
    sentence = build_sentence(ex1, 0, 1, F(1, 2))
    for output, outcome in [("sat", DecisionOutcome.TRUE), ("unsat", DecisionOutcome.FALSE)]:
        config = OracleConfig.parse(f"cmd:{fake_solver(tmp_path, output)}", tmp_dir=str(scripts))
        decision = decide(sentence, config)
        assert decision.outcome == outcome
        assert decision.verdict_line == output
        assert decision.provenance == Provenance.EXTERNAL
    assert list(scripts.iterdir()) == []


def test_external_failure_becomes_oracle_error(ex1, tmp_path):
    config = OracleConfig.parse(f"cmd:{fake_solver(tmp_path, 'unknown')}")
    assert decide(build_sentence(ex1, 0, 1, F(1, 2)), config).failed
    with pytest.raises(OracleError) as info:
        approximate_pair(ex1, 0, 1, F(1, 8), config)
    assert info.value.interval == (0, 1)


def test_missing_solver_is_a_failure(ex1):
    config = OracleConfig.parse("cmd:/nonexistent/solver-binary")
    decision = decide(build_sentence(ex1, 0, 1, F(1, 2)), config)
    assert decision.failed
    assert "could not start" in decision.diagnostics


@pytest.mark.oracle
@pytest.mark.skipif("PTSDIST_TEST_ORACLE" not in os.environ, reason="no external solver configured")
def test_real_solver_agrees_on_example(ex1):
    config = OracleConfig.parse(os.environ["PTSDIST_TEST_ORACLE"], timeout=600)
    assert decide(build_sentence(ex1, 0, 1, F(1, 2)), config).outcome == DecisionOutcome.TRUE


def test_wide_epsilon_returns_unit_interval(ex1):
    interval = approximate_pair(ex1, 0, 1, F(1))
    assert (interval.lower, interval.upper) == (0, 1)
    assert interval.steps == ()


def test_bisimilar_pair_interval(ex1):
    interval = approximate_pair(ex1, 2, 4, F(1, 16))
    assert interval.lower == 0
    assert interval.upper <= F(1, 16)
