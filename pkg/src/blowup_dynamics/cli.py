"""Command-line driver: `blowup-dynamics <command> [flags]`.

Exit status is 0 when every checked property holds, 2 when some property
fails (the report lists them under "failures") and 1 on usage errors.
"""

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import __version__, logger
from .config import ExperimentConfig, get_experiment_config
from .errors import BlowupError, ConfigError, UsageError
from .experiments import run_experiment
from .schema import COMMANDS

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_FAILED = 2

FAMILIES = (
    "all",
    "linear",
    "paper_example_c1",
    "abs_kink",
    "polynomial",
    "rotation_scaling",
    "composite",
)
ORBIT_CSV_HELP = (
    "write the orbit as CSV: step, base coordinates x0.., fiber coordinates y0.. "
    "(complex entries split into _re/_im columns)"
)


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise UsageError(message)


def _json_arg(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise argparse.ArgumentTypeError(f"invalid JSON: {e}") from e


def _common_flags() -> argparse.ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--tol", type=float, help="property tolerance")
    common.add_argument("--samples", type=int, help="sample count")
    common.add_argument(
        "--config",
        type=Path,
        help="JSON config or earlier report; its settings override flags",
    )
    common.add_argument("--output", type=Path, help="write the JSON report here")
    common.add_argument(
        "--log-level",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="overrides BLOWUP_DYNAMICS_LOGLEVEL",
    )
    return common


# (flag, dest, add_argument kwargs) per command; every dest lands in options
OPTIONS: dict[str, list[tuple[str, str, dict[str, Any]]]] = {
    "lift-check": [
        ("--family", "family", {"choices": FAMILIES, "default": "all"}),
        ("--spec", "spec", {"type": _json_arg, "help": "JSON map spec"}),
        ("--pairs", "pairs", {"type": int, "default": 20}),
        (
            "--functoriality-samples",
            "functoriality_samples",
            {"type": int, "default": 1000},
        ),
        ("--functoriality-tol", "functoriality_tol", {"type": float, "default": 1e-9}),
    ],
    "fixed-set": [
        ("--matrix", "matrix", {"type": _json_arg, "default": [[2, 0], [0, 3]]}),
    ],
    "orbit": [
        ("--spec", "spec", {"type": _json_arg, "help": "JSON map spec"}),
        ("--matrix", "matrix", {"type": _json_arg, "default": [[2, 0], [0, 0.5]]}),
        ("--start", "start", {"type": _json_arg, "default": [1.0, 1.0]}),
        ("--on-sigma", "on_sigma", {"action": "store_true"}),
        ("--steps", "steps", {"type": int, "default": 20}),
    ],
    "regularity": [
        ("--spec", "spec", {"type": _json_arg, "help": "JSON map spec"}),
        ("--order", "order", {"type": int, "default": 1, "help": "kink order k"}),
        ("--m", "m", {"type": float, "default": 1.0, "help": "slope of the line"}),
        ("--chart", "chart", {"type": int, "default": 1, "help": "0-based chart"}),
        ("--max-order", "max_order", {"type": int, "default": 4}),
    ],
    "variant-demo": [
        ("--lambda", "lambda", {"type": float, "default": 2.0}),
        ("--theta", "theta", {"type": float, "default": math.pi / 6}),
        ("--allocations", "allocations", {"type": int, "default": 50}),
    ],
    "no-lift-demo": [
        ("--x", "x", {"type": _json_arg, "default": [1.0, 0.0]}),
        ("--y", "y", {"type": _json_arg, "default": [0.0, 1.0]}),
        ("--ratio", "ratio", {"type": float, "default": 0.5}),
    ],
    "euler": [
        ("--n", "n", {"type": int, "default": 2}),
        ("--chi", "chi", {"type": int, "default": 2}),
    ],
}
FIELD_COMMANDS = ("fixed-set", "euler")


def get_parser() -> ArgumentParser:
    parser = ArgumentParser(
        prog="blowup-dynamics",
        description="Blowups of F^n at the origin and the dynamics of lifted maps.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _common_flags()
    for command in COMMANDS:
        sub = subparsers.add_parser(command, parents=[common])
        for flag, dest, kwargs in OPTIONS[command]:
            sub.add_argument(flag, dest=dest, **kwargs)
        if command in FIELD_COMMANDS:
            sub.add_argument("--field", choices=("R", "C"))
        if command == "orbit":
            sub.add_argument("--csv", type=Path, help=ORBIT_CSV_HELP)
            sub.add_argument("--svg", type=Path, help="write a phase portrait (n = 2)")
    return parser


def _read_config_file(path: Optional[Path]) -> Optional[dict[str, Any]]:
    if path is None:
        return None
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e  # noqa: TRY003
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} is not a JSON object")  # noqa: TRY003
    return data


def _resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    options = {dest: getattr(args, dest) for _, dest, _ in OPTIONS[args.command]}
    outputs = {
        kind: str(getattr(args, kind))
        for kind in ("csv", "svg")
        if getattr(args, kind, None) is not None
    }
    return get_experiment_config(
        args.command,
        config_data=_read_config_file(args.config),
        seed=args.seed,
        tol=args.tol,
        samples=args.samples,
        field=getattr(args, "field", None),
        options=options,
        outputs=outputs,
    )


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")  # noqa: TRY003


def _emit(report: dict[str, Any], output: Optional[Path]) -> None:
    payload = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if output is None:
        print(payload)  # noqa: T201
        return
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(payload + "\n", encoding="utf-8")


def main(argv: Optional[list[str]] = None) -> int:
    try:
        args = get_parser().parse_args(argv)
        if args.log_level:
            logger.setLevel(args.log_level)
        report = run_experiment(_resolve_config(args))
        _emit(report, args.output)
    except BlowupError as e:
        print(f"blowup-dynamics: error: {e}", file=sys.stderr)  # noqa: T201
        return EXIT_USAGE
    return EXIT_OK if report["passed"] else EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
