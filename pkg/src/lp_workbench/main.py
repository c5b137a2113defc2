"""CLI entry point and argument parsing."""

from __future__ import annotations

import argparse
import sys
from datetime import datetime
from typing import List, Optional

from .config import (
    CATALOG_SPEC,
    DEFAULT_SEED,
    LOG_DIR,
    MAX_TASK_WORKERS,
    OUTPUT_DIR,
    Tolerances,
    parse_assignment,
)
from .errors import SpecFileError, WorkbenchError
from .pipeline import run
from .report import FORMATS, emit_report
from .specfile import parse_spec
from .utils import banner, close_log_file, log, set_log_file

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


# ---------------------------------------------------------------------------
# Argument parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lp-workbench",
        description=(
            "Check structural claims about L^p operator algebras built from finite "
            "groupoids, group actions and Leavitt-type presentations. Runs the "
            "built-in catalog when no spec file is given."
        ),
    )
    parser.add_argument(
        "spec",
        nargs="?",
        default=str(CATALOG_SPEC),
        help="Task spec file in TOML (default: the built-in catalog)",
    )
    parser.add_argument(
        "--format",
        choices=FORMATS,
        default="both",
        help="Report format written to the output directory (default: both)",
    )
    parser.add_argument(
        "--out",
        type=str,
        default=str(OUTPUT_DIR),
        metavar="DIR",
        help=f"Output directory for reports (default: {OUTPUT_DIR})",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=DEFAULT_SEED,
        help=f"Master seed for every randomized check (default: {DEFAULT_SEED})",
    )
    parser.add_argument(
        "--tolerance",
        action="append",
        default=[],
        metavar="KEY=VAL",
        help="Override a numeric tolerance or guard, e.g. max_bisections=50000 (repeatable)",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=MAX_TASK_WORKERS,
        metavar="N",
        help=f"Tasks run in parallel (default: {MAX_TASK_WORKERS})",
    )
    return parser


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def main(argv: Optional[List[str]] = None) -> int:
    """Entry point for the ``lp-workbench`` CLI.

    Exit codes: 0 when every task passes or is inconclusive, 1 when any task
    fails, 2 on usage, spec-file or output errors.
    """
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.seed < 0:
        parser.error("--seed must be nonnegative")
    if args.workers < 1:
        parser.error("--workers must be at least 1")
    try:
        tolerances = Tolerances().with_overrides(parse_assignment(t) for t in args.tolerance)
    except WorkbenchError as exc:
        parser.error(str(exc))

    LOG_DIR.mkdir(exist_ok=True)
    log_path = LOG_DIR / f"lp_workbench_{datetime.now().strftime('%Y-%m-%d_%H-%M')}.log"
    set_log_file(open(log_path, "w", encoding="utf-8"))

    try:
        try:
            spec = parse_spec(args.spec, tolerances)
        except SpecFileError as exc:
            log(f"ERROR: {args.spec}: {exc}")
            return EXIT_USAGE

        report = run(spec, seed=args.seed, workers=args.workers)

        try:
            emit_report(report, args.out, args.format)
        except OSError as exc:
            log(f"ERROR: cannot write report to {args.out}: {exc}")
            return EXIT_USAGE

        banner("FAILED" if report.failed else "COMPLETE")
        log(f"Log: {log_path}")
        return EXIT_FAILED if report.failed else EXIT_OK
    finally:
        close_log_file()


if __name__ == "__main__":
    sys.exit(main())
