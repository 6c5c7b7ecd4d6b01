from fractions import Fraction as F

import pytest

from models.errors import InvalidPseudometricError, InvalidPtsError, PtsFormatError
from services.pts_io import parse_metric, parse_pts, serialize_metric, serialize_pts
from tests.conftest import EX1_TEXT


def test_parse_example(ex1):
    assert parse_pts(EX1_TEXT) == ex1


def test_serialize_is_canonical(ex1):
    text = serialize_pts(ex1)
    assert text.splitlines()[:3] == ["pts v1", "states 5", "arc 1 2 2/5"]
    assert "arc 3 3 1" in text
    assert parse_pts(text) == ex1


def test_names():
    pts = parse_pts("pts v1\nstates 2\nnames a b\narc 1 2 1\narc 2 2 1\n")
    assert pts.name(0) == "a"
    assert "names a b" in serialize_pts(pts)


@pytest.mark.parametrize("text, fragment", [
    ("", "empty document"),
    ("pts v2\nstates 1\n", "expected 'pts v1'"),
    ("pts v1\nstates x\n", "states <N>"),
    ("pts v1\nstates 2\narc 1 3 1\n", "out of range 1..2"),
    ("pts v1\nstates 2\narc 1 2 1/2\narc 1 2 1/2\n", "duplicate arc 1 -> 2"),
    ("pts v1\nstates 2\narc 1 2 0.5\n", "not a rational literal"),
    ("pts v1\nstates 2\narc 1 2 3/2\n", r"probability 3/2 out of \[0,1\]"),
    ("pts v1\nstates 2\narc 1 2 1\nnames a b\n", "must precede"),
    ("pts v1\nstates 2\nnames a a\n", "distinct"),
    ("pts v1\nstates 2\nedge 1 2 1\n", "unknown directive"),
])
def test_format_errors(text, fragment):
    with pytest.raises(PtsFormatError, match=fragment):
        parse_pts(text)


def test_format_error_carries_line_number():
    with pytest.raises(PtsFormatError) as info:
        parse_pts("pts v1\n# comment\nstates 2\n\narc 1 9 1\n")
    assert info.value.line == 5


def test_bad_row_sum_is_invalid_pts():
    with pytest.raises(InvalidPtsError, match="row 1 sums to 1/2"):
        parse_pts("pts v1\nstates 2\narc 1 2 1/2\n")


def test_metric_documents():
    d = parse_metric("metric v1\nstates 3\ndist 1 2 1/3\ndist 3 1 1/4\ndist 2 3 1/2\n")
    assert d[1, 0] == F(1, 3)
    assert d[0, 2] == F(1, 4)
    assert parse_metric(serialize_metric(d)) == d


def test_metric_rejects_diagonal_and_triangle_failures():
    with pytest.raises(PtsFormatError, match="diagonal"):
        parse_metric("metric v1\nstates 2\ndist 1 1 1/2\n")
    with pytest.raises(InvalidPseudometricError, match="triangle"):
        parse_metric("metric v1\nstates 3\ndist 1 2 1\n")
