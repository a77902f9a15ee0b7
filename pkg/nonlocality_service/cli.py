"""
Command-line entry point
Runs Svetlichny parameter sweeps and region reports

    python -m nonlocality_service.cli sweep --preset fig2 --out data/fig2.csv
    python -m nonlocality_service.cli sweep --scenario sds --n 2 --m 2 --mass 0.033 \
        --axis1 Lambda:0.0001:1:101 --axis2 alpha:0:1:101 --out grid.csv
    python -m nonlocality_service.cli regions grid.csv
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import structlog
from pydantic import ValidationError

from .config import configure_logging
from .errors import InvalidConfig, NonlocalityError
from .sweep import Axis, SweepConfig, figure_preset, region_report, run_sweep, summary_path

logger = structlog.get_logger()

EXIT_DOMAIN_ERROR = 2

# CLI flag -> SweepConfig field
FLAG_FIELDS = {
    "scenario": "scenario",
    "n": "n",
    "p": "p",
    "q": "q",
    "m": "m",
    "mass": "mass",
    "lambda_cosmo": "lambda_cosmo",
    "omega": "omega",
    "temperature": "temperature",
    "alpha": "alpha",
    "audit": "audit",
    "seed": "rng_seed",
    "out": "out",
    "workers": "workers",
    "threshold": "threshold",
    "oracle_restarts": "oracle_restarts",
}

RUN_OVERRIDES = ("audit", "rng_seed", "workers", "threshold", "oracle_restarts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nonlocality",
        description="Four-qubit Svetlichny nonlocality sweeps for curved-spacetime GHZ states",
    )
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    parser.add_argument("--log-json", action="store_true", default=None, help="Render JSON log lines")
    commands = parser.add_subparsers(dest="command", required=True)

    sweep = commands.add_parser("sweep", help="Evaluate a 2-D parameter grid")
    sweep.add_argument("--config", type=Path, help="JSON file mirroring the flags below")
    sweep.add_argument("--preset", choices=["fig2", "fig3", "fig4", "fig5", "fig6"])
    sweep.add_argument("--steps", type=int, help="Grid steps per axis for presets")
    sweep.add_argument("--scenario", choices=["schwarzschild", "sds", "custom-matrix"])
    sweep.add_argument("--n", type=int)
    sweep.add_argument("--p", type=int)
    sweep.add_argument("--q", type=int)
    sweep.add_argument("--m", type=int)
    sweep.add_argument("--mass", type=float)
    sweep.add_argument("--lambda", dest="lambda_cosmo", type=float)
    sweep.add_argument("--omega", type=float)
    sweep.add_argument("--temperature", type=float)
    sweep.add_argument("--alpha", type=float)
    sweep.add_argument("--matrix", type=Path, help="Density operator JSON for custom-matrix sweeps")
    sweep.add_argument("--axis1", help="NAME:MIN:MAX:STEPS, e.g. T:0.001:3:101")
    sweep.add_argument("--axis2", help="NAME:MIN:MAX:STEPS, e.g. alpha:0:1:101")
    sweep.add_argument("--audit", action="store_true", default=None, help="Compare every cell with the oracle")
    sweep.add_argument("--oracle-restarts", type=int)
    sweep.add_argument("--threshold", type=float)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--out", help="CSV path; <out>.summary.json is written next to it")
    sweep.add_argument("--workers", type=int)

    regions = commands.add_parser("regions", help="Report connected S > threshold regions of a sweep CSV")
    regions.add_argument("csv", type=Path)
    regions.add_argument("--threshold", type=float)
    return parser


def _load_config_file(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        return json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InvalidConfig(f"Cannot load config {path}: {e}") from e


def _flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    values = {
        field: getattr(args, flag)
        for flag, field in FLAG_FIELDS.items()
        if getattr(args, flag) is not None
    }
    if args.axis1:
        values["axis1"] = Axis.parse(args.axis1).model_dump()
    if args.axis2:
        values["axis2"] = Axis.parse(args.axis2).model_dump()
    if args.matrix is not None:
        values["matrix"] = _load_config_file(args.matrix)
    return values


def panel_path(out: str, label: str) -> str:
    target = Path(out)
    return str(target.with_name(f"{target.stem}_{label}{target.suffix or '.csv'}"))


def sweep_configs(args: argparse.Namespace) -> List[SweepConfig]:
    """Merge config file and flags (flags win) into one or more sweep configs"""
    payload = _load_config_file(args.config)
    payload.update(_flag_values(args))
    preset = args.preset or payload.get("preset")
    payload.pop("preset", None)
    steps = args.steps or payload.pop("steps", None) or 101

    if not preset:
        return [SweepConfig.parse(payload)]

    overrides = {k: payload[k] for k in RUN_OVERRIDES if k in payload}
    try:
        configs = figure_preset(preset, steps=steps, **overrides)
    except ValidationError as e:
        raise InvalidConfig(str(e)) from e
    if payload.get("out"):
        configs = [c.model_copy(update={"out": panel_path(payload["out"], c.label)}) for c in configs]
    return configs


def run_sweep_command(args: argparse.Namespace) -> int:
    for cfg in sweep_configs(args):
        _, summary = run_sweep(cfg)
        line = {
            "label": cfg.label,
            "max_S": summary["max_S"]["value"],
            "findings": summary["findings"],
        }
        if cfg.out:
            line.update(csv=cfg.out, summary=str(summary_path(cfg.out)))
        print(json.dumps(line))
    return 0


def run_regions_command(args: argparse.Namespace) -> int:
    print(json.dumps(region_report(args.csv, args.threshold), indent=2))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level, args.log_json)

    try:
        if args.command == "sweep":
            return run_sweep_command(args)
        return run_regions_command(args)
    except NonlocalityError as e:
        logger.error("cli_failed", command=args.command, error=str(e), error_type=type(e).__name__)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
