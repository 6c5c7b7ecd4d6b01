"""
Command-line entry point for the distance engine.

    python -m app.main distances ex1.pts --delta 1 --epsilon 1/1000 --format json

Reports go to stdout, logs and diagnostics to stderr. Exit codes: 0 success,
1 input error, 2 oracle failure.
"""
import argparse
import logging
import sys
from fractions import Fraction
from typing import List, Optional, Tuple

from pydantic import ValidationError

from app.config import settings
from models.errors import EngineError, OracleError
from models.schemas import CliConfig, EmitFormat, OracleConfig, OutputFormat, Report
from services.encoder import build_sentence, emit_mathematica, emit_smtlib, simplify_sentence
from services.fixpoint import approximate_all, known_distances
from services.bisimulation import bisimilarity_partition, quotient
from services.kantorovich import apply_delta
from services.logic import interpret, parse_formula
from services.oracle import approximate_pair
from services.pts_io import parse_metric, parse_pts, serialize_metric
from services.reporting import render_report
from services.termination import termination_probabilities
from services.validation import validate_pts
from utils.rationals import parse_rational

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_ORACLE = 2


def _rational(text: str):
    try:
        return parse_rational(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e))


def build_parser() -> argparse.ArgumentParser:
    engine = argparse.ArgumentParser(add_help=False)
    engine.add_argument("--delta", type=_rational, default=settings.delta,
                        help="discount in (0,1] as p/q (default: %(default)s)")
    engine.add_argument("--epsilon", type=_rational, default=settings.epsilon,
                        help="target gap as p/q (default: %(default)s)")
    engine.add_argument("--oracle", default=settings.oracle,
                        help="'internal' or 'cmd:<template>' ({script} is replaced by the script path)")
    engine.add_argument("--timeout", type=float, default=settings.oracle_timeout,
                        help="oracle timeout in seconds")
    engine.add_argument("--budget", type=int, default=None, help="iteration budget (default: 10*N^2)")
    engine.add_argument("--workers", type=int, default=settings.workers, help="worker processes")
    engine.add_argument("--precision", type=int, default=settings.decimal_precision,
                        help="decimal places in reports")
    engine.add_argument("--no-quotient", action="store_true", help="skip bisimulation quotienting")
    engine.add_argument("--log-level", default=settings.log_level)

    output = argparse.ArgumentParser(add_help=False)
    output.add_argument("--format", dest="output_format", choices=["human", "json"], default="human")

    parser = argparse.ArgumentParser(
        prog="ptsdist",
        description="Exact behavioural distances on probabilistic transition systems",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name: str, help_text: str, with_output: bool = True) -> argparse.ArgumentParser:
        parents = [engine, output] if with_output else [engine]
        p = sub.add_parser(name, help=help_text, parents=parents)
        p.add_argument("input", help="pts v1 file")
        return p

    command("validate", "check a pts file")
    command("bisim", "bisimilarity partition")
    command("quotient", "bisimulation quotient as a pts file")
    command("terminate", "termination probabilities")
    delta = command("delta", "apply the distance functional once")
    delta.add_argument("--metric", required=True, help="metric v1 file")
    delta.add_argument("--output", help="also write the result as a metric v1 file")
    command("distances", "certified distances for all pairs")
    command("eval", "evaluate a modal formula").add_argument(
        "--formula", required=True, help="e.g. '<> true & ! <> <> true - 1/2'")

    encode = command("encode", "emit the decision sentence for one pair", with_output=False)
    encode.add_argument("--pair", nargs=2, type=int, required=True, metavar=("I", "J"))
    encode.add_argument("--bound", type=_rational, required=True)
    encode.add_argument("--format", dest="emit_format", choices=["smt2", "mathematica"],
                        default=settings.oracle_format)
    encode.add_argument("--no-simplify", action="store_true")

    approx = command("approx-pair", "bisection search for one distance")
    approx.add_argument("--pair", nargs=2, type=int, required=True, metavar=("I", "J"))
    return parser


def _pair(values: List[int], n: int) -> Tuple[int, int]:
    i, j = values
    for index in (i, j):
        if not 1 <= index <= n:
            raise EngineError(f"pair index {index} out of range 1..{n}")
    return i - 1, j - 1


def _config(args: argparse.Namespace) -> CliConfig:
    oracle = OracleConfig.parse(
        args.oracle,
        timeout=args.timeout,
        tmp_dir=settings.oracle_tmp_dir,
        format=getattr(args, "emit_format", settings.oracle_format),
    )
    return CliConfig(
        subcommand=args.command,
        input_path=args.input,
        delta=args.delta,
        epsilon=args.epsilon,
        output_format=getattr(args, "output_format", "human"),
        oracle=oracle,
        budget=args.budget,
        workers=args.workers,
        precision=args.precision,
        use_quotient=not args.no_quotient,
    )


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _write(path: str, text: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def run(args: argparse.Namespace) -> Tuple[int, str]:
    """Execute one subcommand and return (exit code, stdout text)."""
    config = _config(args)
    text = _read(config.input_path)

    pts = parse_pts(text)

    if config.subcommand == "validate":
        result = validate_pts(pts)
    elif config.subcommand == "bisim":
        result = bisimilarity_partition(pts)
    elif config.subcommand == "quotient":
        result = quotient(pts, bisimilarity_partition(pts))
    elif config.subcommand == "terminate":
        result = termination_probabilities(pts)
    elif config.subcommand == "delta":
        d = parse_metric(_read(args.metric))
        if d.size != pts.n_states:
            raise EngineError(f"metric has {d.size} states but the system has {pts.n_states}")
        result = apply_delta(pts, d, config.delta, config.workers)
        if args.output:
            _write(args.output, serialize_metric(result))
            logger.info(f"Wrote metric to {args.output}")
    elif config.subcommand == "distances":
        result = approximate_all(
            pts, config.delta, config.epsilon,
            use_quotient=config.use_quotient, budget=config.budget, workers=config.workers,
        )
    elif config.subcommand == "eval":
        result = interpret(pts, parse_formula(args.formula), config.delta)
    elif config.subcommand == "encode":
        i, j = _pair(args.pair, pts.n_states)
        sentence = build_sentence(pts, i, j, args.bound)
        if not args.no_simplify:
            sentence = simplify_sentence(sentence, known_distances(pts, Fraction(1)))
        if config.oracle.format == EmitFormat.MATHEMATICA:
            return EXIT_OK, emit_mathematica(sentence.formula)
        return EXIT_OK, emit_smtlib(sentence.formula)
    elif config.subcommand == "approx-pair":
        i, j = _pair(args.pair, pts.n_states)
        result = approximate_pair(pts, i, j, config.epsilon, config.oracle)

    report: Report = render_report(result, config.precision)
    output = report.machine if config.output_format == OutputFormat.JSON else report.human
    return EXIT_OK, output + "\n"


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Configure logging
    logging.basicConfig(
        level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        code, output = run(args)
    except OracleError as e:
        logger.error(f"{args.input}: {e}")
        if e.interval is not None:
            lower, upper = e.interval
            print(f"{args.input}: partial interval [{lower}, {upper}]", file=sys.stderr)
        print(f"{args.input}: oracle failure: {e}", file=sys.stderr)
        return EXIT_ORACLE
    except (EngineError, ValidationError, ValueError) as e:
        print(f"{args.input}: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as e:
        print(f"{args.input}: {e}", file=sys.stderr)
        return EXIT_INPUT

    sys.stdout.write(output)
    return code


if __name__ == "__main__":
    sys.exit(main())
