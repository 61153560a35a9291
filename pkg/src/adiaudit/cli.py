"""Command-line entry point.

Three subcommands, all driven by a TOML config plus optional dotted
overrides::

    adiaudit simulate --config run.toml
    adiaudit verify   --config run.toml --override grid.steps=40000
    adiaudit sweep    --config run.toml --override "sweep.values=[0.01, 0.1]"

Exit codes: 0 success, 1 usage error (bad arguments or config), 2 numerical
failure (degeneracy, tracking or gauge breakdown), 3 verification failure
(a residual exceeded its gate).
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional

from .errors import NumericalFailureError, UsageError
from .runner import load_run_config, run_simulate, run_sweep, run_verify

__all__ = ["build_parser", "main"]

_COMMANDS = {
    "simulate": (run_simulate, "propagate, track, and audit one system"),
    "verify": (run_verify, "build the dual system and check every correspondence identity"),
    "sweep": (run_sweep, "repeat the primal/dual audit over a list of parameter values"),
}


class _Parser(argparse.ArgumentParser):
    """Argument parser that reports problems as UsageError (exit code 1)."""

    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="adiaudit",
        description="Audit adiabatic approximations and their dual-system counterexamples.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name, (_, help_text) in _COMMANDS.items():
        sub = subparsers.add_parser(name, help=help_text, description=help_text)
        sub.add_argument("--config", required=True, help="path to the TOML run configuration")
        sub.add_argument(
            "--override",
            action="append",
            default=[],
            metavar="TABLE.KEY=VALUE",
            help="override one config entry (repeatable)",
        )
        sub.add_argument(
            "--quiet", action="store_true", help="do not print the summary to stdout"
        )
    return parser


def main(argv: Optional[list] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_run_config(args.config, args.override)
        summary = _COMMANDS[args.command][0](config)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    if not args.quiet:
        sys.stdout.write(summary.text)
    return 3 if summary.failures else 0


if __name__ == "__main__":
    sys.exit(main())
