import json

import pytest

from app.main import EXIT_INPUT, EXIT_OK, EXIT_ORACLE, main


def test_terminate(ex1_file, capsys):
    assert main(["terminate", str(ex1_file)]) == EXIT_OK
    assert capsys.readouterr().out.splitlines()[0] == "1/9 5/18 0 1 0"


def test_distances_json(ex1_file, capsys):
    assert main(["distances", str(ex1_file), "--format", "json"]) == EXIT_OK
    out = capsys.readouterr().out
    assert '"pair":[1,2],"exact":"23/72"' in out
    assert json.loads(out)["method"] == "exact_solve"


def test_discounted_distances(ex1_file, capsys):
    assert main(["distances", str(ex1_file), "--delta", "1/2", "--no-quotient"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "d(s1,s3) = 1/93" in out
    assert "d(s3,s4) = 1/2" in out


def test_bisim_and_quotient(ex1_file, capsys):
    assert main(["bisim", str(ex1_file)]) == EXIT_OK
    assert capsys.readouterr().out.strip() == "{s1} {s2} {s3,s5} {s4}"
    assert main(["quotient", str(ex1_file)]) == EXIT_OK
    assert "arc 2 3 1/10" in capsys.readouterr().out


def test_eval(ex1_file, capsys):
    assert main(["eval", str(ex1_file), "--formula", "<> <> true"]) == EXIT_OK
    assert "s2: 4/5 (≈0.800000)" in capsys.readouterr().out


def test_delta_with_metric(ex1_file, tmp_path, capsys):
    metric = tmp_path / "zero.metric"
    metric.write_text("metric v1\nstates 5\n")
    assert main(["delta", str(ex1_file), "--metric", str(metric)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "d(s1,s2) = 0/1" in out
    assert "d(s1,s4) = 1/1" in out


def test_delta_writes_a_metric_file(ex1_file, tmp_path, capsys):
    metric = tmp_path / "zero.metric"
    metric.write_text("metric v1\nstates 5\n")
    first = tmp_path / "first.metric"
    assert main(["delta", str(ex1_file), "--metric", str(metric), "--output", str(first)]) == EXIT_OK
    capsys.readouterr()
    assert "dist 1 4 1" in first.read_text().splitlines()
    assert main(["delta", str(ex1_file), "--metric", str(first)]) == EXIT_OK
    assert "d(s1,s2) = 1/5 (≈0.200000)" in capsys.readouterr().out


def test_json_output_is_byte_identical(ex1_file, capsys):
    outputs = []
    for _ in range(2):
        assert main(["distances", str(ex1_file), "--delta", "1/2", "--format", "json"]) == EXIT_OK
        outputs.append(capsys.readouterr().out)
    assert outputs[0] == outputs[1]
    assert main(["quotient", str(ex1_file), "--format", "json"]) == EXIT_OK
    first = capsys.readouterr().out
    assert main(["quotient", str(ex1_file), "--format", "json"]) == EXIT_OK
    assert capsys.readouterr().out == first


def test_encode(ex1_file, capsys):
    assert main(["encode", str(ex1_file), "--pair", "1", "2", "--bound", "1/2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("(set-logic QF_NRA)\n(declare-const d12 Real)\n")
    assert main(["encode", str(ex1_file), "--pair", "1", "2", "--bound", "1/2",
                 "--format", "mathematica"]) == EXIT_OK
    assert capsys.readouterr().out.startswith("Reduce[Exists[{d12}, ")


def test_approx_pair(ex1_file, capsys):
    assert main(["approx-pair", str(ex1_file), "--pair", "1", "2", "--epsilon", "1/8",
                 "--format", "json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert payload["lower"] == "1/4"
    assert payload["upper"] == "3/8"


def test_validate_reports_bad_rows(tmp_path, capsys):
    bad = tmp_path / "bad.pts"
    bad.write_text("pts v1\nstates 2\narc 1 2 1/2\n")
    assert main(["validate", str(bad)]) == EXIT_INPUT
    assert "row 1 sums to 1/2" in capsys.readouterr().err


def test_input_errors(ex1_file, tmp_path, capsys):
    assert main(["terminate", str(tmp_path / "missing.pts")]) == EXIT_INPUT
    assert main(["distances", str(ex1_file), "--delta", "0"]) == EXIT_INPUT
    assert main(["encode", str(ex1_file), "--pair", "1", "9", "--bound", "1/2"]) == EXIT_INPUT
    assert "out of range" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["distances", str(ex1_file), "--delta", "0.5"])


def test_oracle_failure_exit_code(ex1_file, tmp_path, capsys):
    solver = tmp_path / "solver.sh"
    solver.write_text("echo unknown\n")
    code = main(["approx-pair", str(ex1_file), "--pair", "1", "2", "--oracle", f"cmd:sh {solver}"])
    assert code == EXIT_ORACLE
    assert "partial interval" in capsys.readouterr().err
