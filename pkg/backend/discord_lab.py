"""
Plasmon Feedback Discord Lab
----------------------------
Command-line runner for the scenario, sweep and validation services:
- run: reproduce one figure's data or run an evolve/steady/discord scenario
- sweep: stationary correlations over grids of mu, a, xi, d and beta
- validate: oracle cross-check suite with a pass/fail table

Exit codes: 0 success, 1 configuration error, 2 numeric failure,
3 oracle discrepancy.
"""

import argparse
import logging
import os
import sys
from typing import Optional, Sequence

from dotenv import dotenv_values, load_dotenv
from pydantic import ValidationError

from core.config import get_settings
from core.exceptions import ConfigInvalid, LabError
from schemas.scenario import RunReport, Scenario, ScenarioConfig

logger = logging.getLogger(__name__)

CONFIG_KEYS = (
    "scenario", "mu", "feedback", "a", "xi", "mode", "variant", "method", "t_max", "dt",
    "record_stride", "beta", "d", "propagation_length", "cos_krd", "sin_krd", "kr",
    "matrix", "brute_force", "output", "format", "workers",
)
BOOLEAN_KEYS = ("feedback", "brute_force")


def _add_scenario_flags(parser: argparse.ArgumentParser, with_scenario: bool) -> None:
    parser.add_argument("--config", help="key=value run configuration file")
    if with_scenario:
        parser.add_argument("--scenario", choices=[s.value for s in Scenario])
    parser.add_argument("--mu", help="Feedback strength: value, list 'a,b' or range 'start:stop:count'")
    parser.add_argument("--feedback", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--a", help="Werner weight grid")
    parser.add_argument("--xi", help="Decay rate grid or 'from-waveguide'")
    parser.add_argument("--mode", choices=["full", "appendix"])
    parser.add_argument("--variant", choices=["trace_preserving", "printed"])
    parser.add_argument("--method", choices=["long_time", "null_space"])
    parser.add_argument("--t-max", dest="t_max", type=float)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--record-stride", dest="record_stride", type=int)
    parser.add_argument("--beta", help="Coupling efficiency grid")
    parser.add_argument("--d", help="Qubit separation grid (m)")
    parser.add_argument("--propagation-length", dest="propagation_length", type=float)
    parser.add_argument("--cos-krd", dest="cos_krd", type=float)
    parser.add_argument("--sin-krd", dest="sin_krd", type=float)
    parser.add_argument("--kr", type=float, help="Propagation constant; sets cos/sin from kr*d")
    parser.add_argument("--matrix", help="JSON file with one matrix payload or a list of them")
    parser.add_argument("--brute-force", dest="brute_force", action=argparse.BooleanOptionalAction, default=None)
    parser.add_argument("--output", help="Output directory")
    parser.add_argument("--format", choices=["csv", "json"])
    parser.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="discord_lab", description="Plasmon feedback discord lab")
    commands = parser.add_subparsers(dest="command", required=True)

    _add_scenario_flags(commands.add_parser("run", help="Run one scenario"), with_scenario=True)
    _add_scenario_flags(commands.add_parser("sweep", help="Stationary parameter sweep"), with_scenario=False)

    validate = commands.add_parser("validate", help="Run the oracle cross-check suite")
    validate.add_argument("--output", help="Report directory")
    validate.add_argument("--random-states", dest="random_states", type=int, default=50)
    validate.add_argument("--t-max", dest="t_max", type=float, default=10.0)
    return parser


def _parse_bool(key: str, value: str) -> bool:
    text = value.strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigInvalid(f"{key}={value!r} is not a boolean")


def read_config_file(path: str) -> dict:
    """
    Flat key=value run configuration, '#' comments allowed.

    Raises:
        ConfigInvalid: Missing file or unknown key
    """
    if not os.path.isfile(path):
        raise ConfigInvalid(f"Config file not found: {path}")
    values = {}
    for key, value in dotenv_values(path).items():
        key = key.strip().lower().replace("-", "_")
        if key not in CONFIG_KEYS:
            raise ConfigInvalid(f"Unknown config key {key!r} in {path}")
        if value is None or value == "":
            continue
        values[key] = _parse_bool(key, value) if key in BOOLEAN_KEYS else value
    return values


def load_config(args: argparse.Namespace, scenario: Optional[Scenario] = None) -> ScenarioConfig:
    """Settings defaults, overridden by the config file, overridden by flags."""
    merged = {"output": get_settings().OUTPUT_DIR}
    if args.config:
        merged.update(read_config_file(args.config))
    merged.update({k: v for k, v in vars(args).items() if k in CONFIG_KEYS and v is not None})
    if scenario is not None:
        merged["scenario"] = scenario
    if "scenario" not in merged:
        raise ConfigInvalid("No scenario given (use --scenario or scenario= in the config file)")
    try:
        return ScenarioConfig(**merged)
    except ValidationError as e:
        raise ConfigInvalid(f"Invalid configuration: {e}") from e


def _summary(report: RunReport) -> str:
    lines = [f"{report.scenario}: {report.rows} rows, max trace drift {report.max_trace_drift:.3e}"]
    lines += [f"  {path}" for path in report.files]
    lines += [f"  flag: {flag}" for flag in report.flags]
    lines += [f"  discrepancy: {item}" for item in report.discrepancies]
    return "\n".join(lines)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """CLI entry point; returns the process exit code."""
    load_dotenv()
    settings = get_settings()
    logging.basicConfig(
        level=settings.log_level,
        format="%(asctime)s - %(levelname)s - %(message)s"
    )
    args = build_parser().parse_args(argv)

    from services.scenario_service import scenario_service
    from services.validation_service import validation_service

    try:
        if args.command == "validate":
            report = validation_service.run(output=args.output, random_states=args.random_states, t_max=args.t_max)
            print(report.table())
        elif args.command == "sweep":
            report = scenario_service.sweep(load_config(args, Scenario.SWEEP))
            print(_summary(report))
        else:
            report = scenario_service.run_scenario(load_config(args))
            print(_summary(report))
        report.raise_for_discrepancies()
    except LabError as e:
        logger.error(f"❌ [RUNNER] {type(e).__name__}: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    return 0


if __name__ == "__main__":
    sys.exit(main())
