"""
Text formats for transition systems (`pts v1`) and distance matrices (`metric v1`).

Both formats are line based; `#` starts a comment. Indices in files are
1-based.

    pts v1
    states 5
    names a b c d e
    arc 1 2 2/5
"""
import logging
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Tuple

from models.errors import InvalidPseudometricError, InvalidPtsError, PtsFormatError
from models.schemas import PTS, DistanceMatrix
from services.validation import validate_pseudometric, validate_pts
from utils.rationals import format_compact, parse_rational

logger = logging.getLogger(__name__)

PTS_HEADER = "pts v1"
METRIC_HEADER = "metric v1"


def _content_lines(text: str) -> Iterator[Tuple[int, List[str]]]:
    """Yield (line number, tokens) for non-empty lines with comments removed."""
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def _parse_index(token: str, n: int, line: int) -> int:
    if not token.isdigit():
        raise PtsFormatError(line, f"state index must be a positive integer, got {token!r}")
    index = int(token)
    if not 1 <= index <= n:
        raise PtsFormatError(line, f"state index {index} out of range 1..{n}")
    return index - 1


def _parse_probability(token: str, line: int) -> Fraction:
    try:
        value = parse_rational(token)
    except ValueError as e:
        raise PtsFormatError(line, str(e))
    if value < 0 or value > 1:
        raise PtsFormatError(line, f"probability {token} out of [0,1]")
    return value


def _parse_header(lines: Iterator[Tuple[int, List[str]]], header: str) -> int:
    """Consume the header and `states N` lines and return N."""
    first = next(lines, None)
    if first is None:
        raise PtsFormatError(1, f"empty document, expected '{header}'")
    number, tokens = first
    if " ".join(tokens) != header:
        raise PtsFormatError(number, f"expected '{header}', got {' '.join(tokens)!r}")

    second = next(lines, None)
    if second is None:
        raise PtsFormatError(number, "missing 'states <N>' line")
    number, tokens = second
    if len(tokens) != 2 or tokens[0] != "states" or not tokens[1].isdigit():
        raise PtsFormatError(number, f"expected 'states <N>', got {' '.join(tokens)!r}")
    n = int(tokens[1])
    if n < 1:
        raise PtsFormatError(number, "a system needs at least one state")
    return n


def parse_pts(text: str) -> PTS:
    """
    Parse a `pts v1` document into a validated transition system.

    Args:
        text: Document contents

    Returns:
        The parsed system

    Raises:
        PtsFormatError: on syntax errors, bad indices, duplicate arcs or
            probabilities outside [0,1]
        InvalidPtsError: when a row does not sum to 0 or 1
    """
    lines = _content_lines(text)
    n = _parse_header(lines, PTS_HEADER)
    labels: Optional[Tuple[str, ...]] = None
    arcs: Dict[Tuple[int, int], Fraction] = {}

    for number, tokens in lines:
        keyword = tokens[0]
        if keyword == "names":
            if labels is not None:
                raise PtsFormatError(number, "duplicate 'names' line")
            if arcs:
                raise PtsFormatError(number, "'names' must precede the arcs")
            names = tokens[1:]
            if len(names) != n:
                raise PtsFormatError(number, f"expected {n} names, got {len(names)}")
            if len(set(names)) != n:
                raise PtsFormatError(number, "state names must be distinct")
            labels = tuple(names)
        elif keyword == "arc":
            if len(tokens) != 4:
                raise PtsFormatError(number, "expected 'arc <i> <j> <p/q>'")
            i = _parse_index(tokens[1], n, number)
            j = _parse_index(tokens[2], n, number)
            if (i, j) in arcs:
                raise PtsFormatError(number, f"duplicate arc {i + 1} -> {j + 1}")
            arcs[(i, j)] = _parse_probability(tokens[3], number)
        else:
            raise PtsFormatError(number, f"unknown directive {keyword!r}")

    rows = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), p in arcs.items():
        rows[i][j] = p
    pts = PTS.from_rows(rows, labels=labels)

    report = validate_pts(pts)
    if not report.ok:
        raise InvalidPtsError(report)
    logger.debug(f"Parsed PTS with {n} states and {len(arcs)} arcs")
    return pts


def serialize_pts(pts: PTS) -> str:
    """Canonical text: arcs sorted by (from, to), lowest terms, zero arcs dropped."""
    lines = [PTS_HEADER, f"states {pts.n_states}"]
    if pts.labels:
        lines.append("names " + " ".join(pts.labels))
    for i, row in enumerate(pts.pi):
        for j, p in enumerate(row):
            if p:
                lines.append(f"arc {i + 1} {j + 1} {format_compact(p)}")
    return "\n".join(lines) + "\n"


def parse_metric(text: str) -> DistanceMatrix:
    """
    Parse a `metric v1` document (`dist i j p/q` per unordered pair, missing = 0).

    Raises:
        PtsFormatError: on syntax errors
        InvalidPseudometricError: when the result is not a 1-bounded pseudometric
    """
    lines = _content_lines(text)
    n = _parse_header(lines, METRIC_HEADER)
    entries: Dict[Tuple[int, int], Fraction] = {}

    for number, tokens in lines:
        if tokens[0] != "dist" or len(tokens) != 4:
            raise PtsFormatError(number, "expected 'dist <i> <j> <p/q>'")
        i = _parse_index(tokens[1], n, number)
        j = _parse_index(tokens[2], n, number)
        if i == j:
            raise PtsFormatError(number, "diagonal distances are always 0 and may not be given")
        key = (min(i, j), max(i, j))
        if key in entries:
            raise PtsFormatError(number, f"duplicate distance for pair ({key[0] + 1},{key[1] + 1})")
        entries[key] = _parse_probability(tokens[3], number)

    d = DistanceMatrix.from_pairs(n, entries)
    report = validate_pseudometric(d)
    if not report.ok:
        raise InvalidPseudometricError(report)
    return d


def serialize_metric(d: DistanceMatrix) -> str:
    lines = [METRIC_HEADER, f"states {d.size}"]
    for i, j in d.pairs():
        if d[i, j]:
            lines.append(f"dist {i + 1} {j + 1} {format_compact(d[i, j])}")
    return "\n".join(lines) + "\n"
