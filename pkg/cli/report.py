"""
Report records and writers.

startedAt and durationMs are the only run-dependent fields; the digest covers
everything else, so two runs of the same config can be compared by digest.
"""

import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict, List, Optional, Sequence, Tuple

from utils.serialization import canonical_dumps, csv_rows, sha256_hex

TRACE_HEADER = ("iteration", "energy")


@dataclass
class Report:
    command: str
    config: Dict[str, Any]
    results: Dict[str, Any]
    passed: bool
    started_at: str = ""
    duration_ms: float = 0.0
    trace_rows: List[Tuple[int, float]] = field(default_factory=list, repr=False)

    def body(self) -> Dict[str, Any]:
        return {
            "command": self.command,
            "config": self.config,
            "results": self.results,
            "pass": self.passed,
        }

    @property
    def digest(self) -> str:
        return sha256_hex(canonical_dumps(self.body(), indent=0))

    def to_dict(self) -> Dict[str, Any]:
        payload = self.body()
        payload.update({
            "startedAt": self.started_at,
            "durationMs": self.duration_ms,
            "digest": self.digest,
        })
        return payload

    def to_json(self) -> str:
        return canonical_dumps(self.to_dict()) + "\n"

    def to_csv(self) -> str:
        return csv_rows(TRACE_HEADER, self.trace_rows)

    @property
    def exit_code(self) -> int:
        return 0 if self.passed else 1


def utc_timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="milliseconds")


def render(report: Report, fmt: str = "json") -> str:
    return report.to_csv() if fmt == "csv" else report.to_json()


def write_report(report: Report, output: Optional[str] = None, fmt: str = "json") -> str:
    """
    Write the report to a file, or to stdout when no path is given.

    Returns:
        The rendered text
    """
    text = render(report, fmt)
    if output:
        with open(output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()
    return text


def all_passed(items: Sequence[Dict[str, Any]]) -> bool:
    return all(bool(item.get("pass")) for item in items)
