"""``sim`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings

from . import runner
from .config import load_config
from .errors import ConfigError, HybridGateError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ("truth-table", "sweep", "modes", "validate-linearization")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sim", description="Hybrid optical-microwave CZ gate simulator")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="key = value configuration file")
    parser.add_argument("--out", help="write CSV here instead of stdout")
    parser.add_argument("--jobs", type=int, default=None,
                        help="worker processes (default: available CPUs)")
    parser.add_argument("--oracle-check", action="store_true",
                        help="truth-table only: add Fock-oracle fidelity columns")
    return parser


def run(command: str, cfg, jobs=None, oracle_check: bool = False) -> runner.Table:
    if command == "truth-table":
        return runner.truth_table(cfg, jobs, oracle_check)
    if command == "sweep":
        return runner.sweep(cfg, jobs)
    if command == "modes":
        return runner.modes(cfg)
    return runner.validate_linearization(cfg, jobs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.jobs is not None and args.jobs < 1:
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            table = run(args.command, cfg, args.jobs, args.oracle_check)
        text = table.to_csv(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (HybridGateError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
