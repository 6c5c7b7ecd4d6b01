"""
Human and machine renderings of engine results.

Every rational appears exactly ("p/q") and as a rounded decimal. Machine
output is compact JSON whose key order is fixed, so identical results give
byte-identical text.
"""
import json
import logging
from fractions import Fraction
from functools import singledispatch
from typing import Any, Dict, List

from models.schemas import (
    BoundsResult,
    Decision,
    DistanceMatrix,
    PairInterval,
    Partition,
    QuotientResult,
    Report,
    TerminationVector,
    ValidationReport,
    Valuation,
    Violation,
)
from services.pts_io import serialize_pts
from utils.rationals import format_compact, format_decimal, format_rational, render_rational

logger = logging.getLogger(__name__)


def _dumps(payload: Dict[str, Any]) -> str:
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)


def _exact(value: Fraction, precision: int) -> Dict[str, str]:
    return {"exact": format_rational(value), "approx": format_decimal(value, precision)}


def _block(states) -> str:
    return "{" + ",".join(f"s{s + 1}" for s in states) + "}"


@singledispatch
def render_report(result: Any, precision: int = 6) -> Report:
    """Render an engine result; dispatches on the result type."""
    raise TypeError(f"no report format for {type(result).__name__}")


@render_report.register
def _(result: Fraction, precision: int = 6) -> Report:
    return Report(
        human=render_rational(result, precision),
        machine=_dumps(_exact(result, precision)),
    )


def _violation_line(violation: Violation, precision: int) -> str:
    if violation.value is None:
        return violation.message
    return f"{violation.message} (≈{format_decimal(violation.value, precision)})"


@render_report.register
def _(result: ValidationReport, precision: int = 6) -> Report:
    human = "ok" if result.ok else "\n".join(_violation_line(v, precision) for v in result.violations)
    machine = _dumps({
        "ok": result.ok,
        "violations": [
            {
                "kind": v.kind,
                "indices": list(v.indices),
                "message": v.message,
                **(_exact(v.value, precision) if v.value is not None else {}),
            }
            for v in result.violations
        ],
    })
    return Report(human=human, machine=machine)


@render_report.register
def _(result: Partition, precision: int = 6) -> Report:
    return Report(
        human=" ".join(_block(block) for block in result.blocks),
        machine=_dumps({"blocks": [[s + 1 for s in block] for block in result.blocks]}),
    )


@render_report.register
def _(result: QuotientResult, precision: int = 6) -> Report:
    comments = [
        f"# block {k + 1} = {_block(block)}" for k, block in enumerate(result.partition.blocks)
    ]
    text = serialize_pts(result.quotient)
    q = result.quotient
    arcs = [
        f"# arc {i + 1} {j + 1} = {render_rational(q.pi[i][j], precision)}"
        for i in range(q.n_states) for j in range(q.n_states) if q.pi[i][j]
    ]
    return Report(
        human="\n".join(comments + [text.rstrip("\n")] + arcs),
        machine=_dumps({
            "blocks": [[s + 1 for s in block] for block in result.partition.blocks],
            "projection": [b + 1 for b in result.projection],
            "pts": text,
        }),
    )


@render_report.register
def _(result: TerminationVector, precision: int = 6) -> Report:
    lines = [" ".join(format_compact(v) for v in result.values)]
    lines.extend(
        f"s{i + 1}: {render_rational(v, precision)}" for i, v in enumerate(result.values)
    )
    machine = _dumps({
        "termination": [
            {"state": i + 1, **_exact(v, precision)} for i, v in enumerate(result.values)
        ],
    })
    return Report(human="\n".join(lines), machine=machine)


@render_report.register
def _(result: Valuation, precision: int = 6) -> Report:
    return Report(
        human="\n".join(f"s{i + 1}: {render_rational(v, precision)}" for i, v in enumerate(result.values)),
        machine=_dumps({
            "values": [{"state": i + 1, **_exact(v, precision)} for i, v in enumerate(result.values)],
        }),
    )


@render_report.register
def _(result: DistanceMatrix, precision: int = 6) -> Report:
    human = [f"d(s{i + 1},s{j + 1}) = {render_rational(result[i, j], precision)}" for i, j in result.pairs()]
    machine = _dumps({
        "pairs": [
            {"pair": [i + 1, j + 1], **_exact(result[i, j], precision)} for i, j in result.pairs()
        ],
    })
    return Report(human="\n".join(human), machine=machine)


def _bounds_pair(result: BoundsResult, i: int, j: int, precision: int) -> Dict[str, Any]:
    lower, upper = result.lower[i, j], result.upper[i, j]
    return {
        "pair": [i + 1, j + 1],
        "exact": format_rational(lower) if lower == upper else None,
        "lower": format_rational(lower),
        "lower_approx": format_decimal(lower, precision),
        "upper": format_rational(upper),
        "upper_approx": format_decimal(upper, precision),
    }


@render_report.register
def _(result: BoundsResult, precision: int = 6) -> Report:
    lines: List[str] = [
        f"delta = {format_rational(result.delta)}, epsilon = {format_rational(result.epsilon)}",
        f"certified: {'yes' if result.certified else 'no'} "
        f"(method {result.method.value}, {result.iterations} iterations, "
        f"gap {render_rational(result.gap, precision)})",
    ]
    for i, j in result.lower.pairs():
        lower, upper = result.lower[i, j], result.upper[i, j]
        if lower == upper:
            lines.append(f"d(s{i + 1},s{j + 1}) = {render_rational(lower, precision)}  exact")
        else:
            lines.append(
                f"d(s{i + 1},s{j + 1}) in [{render_rational(lower, precision)}, "
                f"{render_rational(upper, precision)}]"
            )
    lines.extend(f"note: {note}" for note in result.notes)

    machine = _dumps({
        "certified": result.certified,
        "delta": format_rational(result.delta),
        "epsilon": format_rational(result.epsilon),
        "method": result.method.value,
        "iterations": result.iterations,
        "gap": format_rational(result.gap),
        "quotiented": result.quotiented,
        "pairs": [_bounds_pair(result, i, j, precision) for i, j in result.lower.pairs()],
        "notes": list(result.notes),
    })
    return Report(human="\n".join(lines), machine=machine)


@render_report.register
def _(result: PairInterval, precision: int = 6) -> Report:
    i, j = result.pair
    human = [
        f"d(s{i + 1},s{j + 1}) in [{render_rational(result.lower, precision)}, "
        f"{render_rational(result.upper, precision)}]",
        f"method: {result.method.value}, {len(result.steps)} oracle calls",
    ]
    human.extend(f"  m = {format_rational(step.bound)}: {step.outcome.value}" for step in result.steps)
    if result.diagnostics:
        human.append(f"diagnostics: {result.diagnostics}")
    machine = _dumps({
        "pair": [i + 1, j + 1],
        "lower": format_rational(result.lower),
        "lower_approx": format_decimal(result.lower, precision),
        "upper": format_rational(result.upper),
        "upper_approx": format_decimal(result.upper, precision),
        "method": result.method.value,
        "steps": [{"bound": format_rational(s.bound), "outcome": s.outcome.value} for s in result.steps],
    })
    return Report(human="\n".join(human), machine=machine)


@render_report.register
def _(result: Decision, precision: int = 6) -> Report:
    human = f"{result.outcome.value} ({result.provenance.value})"
    if result.diagnostics:
        human += f": {result.diagnostics}"
    return Report(
        human=human,
        machine=_dumps({
            "outcome": result.outcome.value,
            "provenance": result.provenance.value,
            "verdict": result.verdict_line,
            "diagnostics": result.diagnostics,
        }),
    )
