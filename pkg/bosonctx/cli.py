"""Command-line entry point.

    python -m bosonctx --scenario bosonctx/scenarios/hom.json --out hom.json
    python -m bosonctx reproduce-reply --out reply.csv --format csv --samples 1000000 --seed 42
"""
import argparse
import logging
import sys
from typing import List, Optional

from bosonctx import __version__
from bosonctx.runner import FORMATS, ScenarioRunner

USAGE_ERROR = 2


def _add_report_flags(parser: argparse.ArgumentParser, suppress: bool = False) -> None:
    # Subcommand copies use SUPPRESS so flags given before the subcommand are kept.
    def default(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--out", default=default(None), help="Report path, written atomically")
    parser.add_argument("--format", dest="fmt", choices=FORMATS, default=default("json"),
                        help="Report format (default: json)")
    parser.add_argument("--seed", type=int, default=default(None), help="Monte Carlo seed (overrides BOSONCTX_SEED)")
    parser.add_argument("--samples", type=int, default=default(None), help="Monte Carlo runs per context")
    parser.add_argument("--tolerance", type=float, default=default(None),
                        help="Default MATCH tolerance (overrides BOSONCTX_TOLERANCE)")
    parser.add_argument("-v", "--verbose", action="count", default=default(0), help="-v for INFO, -vv for DEBUG")
    parser.add_argument("--inject-fault", default=default(None), metavar="QUANTITY", help=argparse.SUPPRESS)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonctx",
        description="Run bosonic contextuality scenarios and write MATCH/MISMATCH reports.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--scenario", help="Scenario JSON file to run")
    _add_report_flags(parser)

    commands = parser.add_subparsers(dest="command")
    reply = commands.add_parser("reproduce-reply", help="Recompute every claim of the dispute in one report")
    _add_report_flags(reply, suppress=True)
    return parser


def configure_logging(verbosity: int) -> None:
    level = logging.WARNING if verbosity <= 0 else logging.INFO if verbosity == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` and run; returns the process exit status."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose)

    if args.out is None:
        parser.print_usage(sys.stderr)
        print("bosonctx: error: --out is required", file=sys.stderr)
        return USAGE_ERROR

    runner = ScenarioRunner(tolerance=args.tolerance)
    if args.command == "reproduce-reply":
        return runner.run_reply(args.out, args.fmt, args.seed, args.samples, args.inject_fault)
    if args.scenario is None:
        parser.print_usage(sys.stderr)
        print("bosonctx: error: --scenario is required unless running reproduce-reply", file=sys.stderr)
        return USAGE_ERROR
    return runner.run(args.scenario, args.out, args.fmt, args.seed, args.samples, args.inject_fault)


if __name__ == "__main__":
    sys.exit(main())
