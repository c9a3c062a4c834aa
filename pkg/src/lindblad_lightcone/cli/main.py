"""Command-line entry point.

Exit codes: 0 all checks passed, 2 some check failed, 3 configuration or
input error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from ..errors import ConfigError, LightconeError, NumericFailureError, RejectedInputError
from .config import DEFAULT_TEXT, parse_config
from .runner import run_scenario

EXIT_OK, EXIT_CHECKS, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3, 4


def _common(default) -> argparse.ArgumentParser:
    # shared by the top level and every subcommand so flags work on either side
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--output-dir", default=default, help="directory for result files (overrides run.output_dir)")
    p.add_argument("--threads", type=int, default=default, help="worker threads (LINDBLAD_LIGHTCONE_THREADS wins)")
    p.add_argument("--verbose", "-v", action="count", default=default, help="log progress (-vv for debug)")
    return p


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lightcone",
        description="Propagation-speed experiments for Lindblad dynamics.",
        parents=[_common(None)],
    )
    sub = p.add_subparsers(dest="command", required=True)
    inner = _common(argparse.SUPPRESS)
    run = sub.add_parser("run", parents=[inner], help="run the scenario named in the config")
    run.add_argument("config", type=Path)
    audit = sub.add_parser("audit", parents=[inner], help="only check model assumptions and compute kappa")
    audit.add_argument("config", type=Path)
    sub.add_parser("print-defaults", parents=[inner], help="print the default configuration")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    verbose = args.verbose or 0
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.command == "print-defaults":
        sys.stdout.write(DEFAULT_TEXT)
        return EXIT_OK
    try:
        text = args.config.read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read {args.config}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command == "audit":
        cfg = replace(cfg, scenario="audit")
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = run_scenario(cfg, threads=args.threads, output_dir=args.output_dir)
    except RejectedInputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except LightconeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for name, ok in summary.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {name}")
    print(f"kappa = {summary.kappa:.12g}; files in {summary.output_dir}; {summary.wall_clock_seconds:.2f} s")
    return EXIT_OK if summary.passed else EXIT_CHECKS


if __name__ == "__main__":
    sys.exit(main())
