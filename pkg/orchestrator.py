"""
Main orchestrator: parses flags, runs one calibra command and writes its report.
This is the root entry point (`python orchestrator.py <command> [flags]`).
"""

import sys
from typing import List, Optional

from cli import UsageError
from cli.commands import run
from cli.config import parse_run_config
from cli.report import write_report
from energy_densities import SpectrumError
from exterior_algebra import DomainError


def main(argv: Optional[List[str]] = None) -> int:
    """
    Run a command end to end.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Exit code: 0 pass, 1 assertion or numeric failure, 2 usage/config error
    """
    try:
        cfg = parse_run_config(argv)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2

    if cfg.debug:
        print(f"📡 calibra {cfg.command} (seed {cfg.seed}, workers {cfg.workers})", file=sys.stderr)

    try:
        report = run(cfg)
    except UsageError as e:
        print(f"❌ {e}", file=sys.stderr)
        return 2
    except (SpectrumError, DomainError) as e:
        print(f"❌ {cfg.command} failed: {e}", file=sys.stderr)
        return 1

    try:
        write_report(report, cfg.output, cfg.fmt)
    except OSError as e:
        print(f"❌ cannot write report to {cfg.output}: {e}", file=sys.stderr)
        return 2

    if cfg.debug:
        status = "✅" if report.passed else "❌"
        print(f"{status} {cfg.command}: pass={report.passed} in {report.duration_ms:.0f}ms", file=sys.stderr)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
