"""
Run configuration: command-line flags merged with an optional JSON config file.

Precedence for every shared setting is flag, then config file, then the
environment/default from utils.config.
"""

import argparse
import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from cli import UsageError
from utils import config
from utils.schema import SchemaViolation, load_json_file, validate_payload

COMMANDS = (
    "models",
    "verify",
    "oracles",
    "torus-min",
    "torus-invariance",
    "torus-calibration",
    "bound",
    "intersection",
    "counterexample",
    "suite-all",
)
TORUS_COMMANDS = ("torus-min", "torus-invariance", "torus-calibration", "bound", "intersection")
MAX_SEED = 2 ** 64 - 1


@dataclass(frozen=True)
class RunConfig:
    """Everything a command needs; echoed into its report."""
    command: str
    seed: int
    params: Dict[str, Any] = field(default_factory=dict)
    trials: Optional[int] = None
    samples: Optional[int] = None
    workers: int = 1
    fmt: str = "json"
    quick: bool = False
    output: Optional[str] = None
    tag: Optional[str] = None
    q: Optional[int] = None
    form_path: Optional[str] = None
    suite: Optional[str] = None
    k: Optional[int] = None
    config_path: Optional[str] = None
    quiet: bool = False

    @property
    def debug(self) -> bool:
        return not self.quiet

    def count(self, name: str, default: int) -> int:
        """
        Resolve a sample count: flag, then config file, then default; --quick
        divides whichever applies.

        Args:
            name: "trials" or "samples"
            default: Acceptance-size default for the command

        Returns:
            Positive count
        """
        value = getattr(self, name)
        if value is None:
            value = self.params.get(name, default)
        return config.scaled_count(int(value), self.quick)

    def param(self, name: str, default: Any = None) -> Any:
        return self.params.get(name, default)

    def to_dict(self) -> Dict[str, Any]:
        """Config echo; output path, verbosity and worker count do not affect results."""
        return {
            "command": self.command,
            "seed": self.seed,
            "params": self.params,
            "trials": self.trials,
            "samples": self.samples,
            "format": self.fmt,
            "quick": self.quick,
            "tag": self.tag,
            "q": self.q,
            "form": self.form_path,
            "suite": self.suite,
            "k": self.k,
            "config": self.config_path,
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calibra",
        description="Numerical lab for calibrated maps: local models, inequality sweeps and flat torus experiments.",
    )
    parser.add_argument("command", choices=COMMANDS, help="Experiment or verification suite to run")
    parser.add_argument("--config", dest="config_path", help="JSON experiment config (see docs/run_config.schema.json)")
    parser.add_argument("--seed", type=int, help="Root seed (default: CALIBRA_SEED or a fixed constant)")
    parser.add_argument("--trials", type=int, help="Random inputs per sweep")
    parser.add_argument("--samples", type=int, help="Monte-Carlo samples")
    parser.add_argument("--workers", type=int, default=config.DEFAULT_WORKERS, help="Worker threads")
    fmt = parser.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", help="JSON report (default)")
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", help="CSV energy trace (torus-min only)")
    parser.add_argument("--quick", action="store_true", help=f"Divide every sample count by {config.QUICK_FACTOR}")
    parser.add_argument("--output", help="Write the report here instead of stdout")
    parser.add_argument("--tag", help="Model tag: kahler(q), quaternionic(q), g2 or spin7")
    parser.add_argument("--q", type=int, help="Complex or quaternionic dimension for --tag kahler/quaternionic")
    parser.add_argument("--form", dest="form_path", help="KForm JSON replacing the standard model form")
    parser.add_argument("--suite", help="Verification suite (default: all)")
    parser.add_argument("--k", type=int, help="Degree for the cohomology bound")
    parser.add_argument("--quiet", action="store_true", help="No progress output on stderr")
    parser.set_defaults(fmt="json")
    return parser


def load_params(path: str) -> Dict[str, Any]:
    """Read and schema-check a config file."""
    try:
        payload = load_json_file(path)
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from e
    try:
        validate_payload(payload, config.RUN_CONFIG_SCHEMA)
    except SchemaViolation as e:
        raise UsageError(e.detail, e.path) from e
    return payload


def _positive(value: Optional[int], name: str):
    if value is not None and value < 1:
        raise UsageError(f"--{name} must be positive, got {value}", f"$.{name}")


def config_from_args(args: argparse.Namespace) -> RunConfig:
    """
    Merge parsed flags with the optional config file.

    Raises:
        UsageError: schema violation, bad flag value or a command/flag mismatch
    """
    params = load_params(args.config_path) if args.config_path else {}

    for name in ("trials", "samples", "workers", "k", "q"):
        _positive(getattr(args, name), name)
    if args.seed is not None and not 0 <= args.seed <= MAX_SEED:
        raise UsageError(f"seed must be a 64-bit unsigned integer, got {args.seed}", "$.seed")
    if args.fmt == "csv" and args.command != "torus-min":
        raise UsageError("CSV output is only available for torus-min flow traces", "$.format")
    if args.command in TORUS_COMMANDS and not args.config_path:
        raise UsageError(f"{args.command} needs --config with m, n, G, H and Q", "$")

    seed = config.resolve_seed(args.seed if args.seed is not None else params.get("seed"))
    return RunConfig(
        command=args.command,
        seed=seed,
        params={key: value for key, value in params.items() if key != "seed"},
        trials=args.trials,
        samples=args.samples,
        workers=args.workers,
        fmt=args.fmt,
        quick=args.quick,
        output=args.output,
        tag=args.tag if args.tag is not None else params.get("tag"),
        q=args.q,
        form_path=args.form_path,
        suite=args.suite,
        k=args.k if args.k is not None else params.get("k"),
        config_path=args.config_path,
        quiet=args.quiet,
    )


def parse_run_config(argv: Optional[List[str]] = None) -> RunConfig:
    """argparse errors exit with status 2; everything else raises UsageError."""
    return config_from_args(build_parser().parse_args(argv))
