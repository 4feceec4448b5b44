"""Command line entry point: ``paramweight analyze|fiber|monodromy|check CONFIG``."""

from __future__ import annotations

import argparse
import sys

from .config import load_config
from .errors import InputError, NumericFailure
from .pipeline import RENDERERS, run_analyze, run_subcommand, to_json

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3


def build_parser() -> argparse.ArgumentParser:
    def global_options(p, default):
        p.add_argument("--format", choices=("text", "json"), default=default("text"), help="report format")
        p.add_argument("--epsilon", type=float, default=default(None), help="override the loop radius from the config")

    parser = argparse.ArgumentParser(
        prog="paramweight",
        description="Weight filtrations of parameterized surface germs from sheet monodromy.",
    )
    global_options(parser, lambda v: v)
    # accepted after the subcommand too; suppressed defaults keep a value given before it
    common = argparse.ArgumentParser(add_help=False)
    global_options(common, lambda v: argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("analyze", parents=[common], help="full weight and vanishing-cycle report")
    p.add_argument("config")
    p = sub.add_parser("fiber", parents=[common], help="preimages of a target point")
    p.add_argument("config")
    p.add_argument("--point", required=True, help="target point a,b,c (complex entries like 0.1+0.2j allowed)")
    p = sub.add_parser("monodromy", parents=[common], help="sheet permutation around one branch")
    p.add_argument("config")
    p.add_argument("--branch", required=True, help="branch label")
    p = sub.add_parser("check", parents=[common], help="input validation and parameterized-surface diagnostic")
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.epsilon is not None:
            config = config.with_epsilon(args.epsilon)
        if args.command == "analyze":
            report = run_analyze(config)
        else:
            extra = {k: getattr(args, k) for k in ("point", "branch") if hasattr(args, k)}
            report = run_subcommand(args.command, config, extra)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericFailure as exc:
        where = f" (branch {exc.branch}, refinement depth {exc.depth})" if exc.branch else ""
        print(f"numeric failure{where}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.format == "json":
        sys.stdout.write(to_json(report))
    else:
        sys.stdout.write(RENDERERS[args.command](report))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
