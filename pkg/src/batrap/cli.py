"""Command-line front end.

    batrap run SCENARIO [--config PATH] [--seed N] [--out DIR]
                        [--samples N] [--format {csv,json}]
    batrap validate --config PATH
    batrap registry
    batrap default-config

Exit codes: 0 success, 1 bad configuration (the message names the offending
key), 2 numerical failure, 3 I/O failure.  Outputs depend only on
(scenario, config, seed).  The BATRAP_THREADS environment variable caps
worker parallelism; the current engines are single-threaded, so any positive
value is accepted and the cap is trivially honored.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import scenarios
from .config import (
    ConfigError,
    ScenarioConfig,
    default_config_text,
    parse_config_file,
    parse_config_text,
    validate_config,
)
from .constants import registry_to_json
from .fitting import FitError
from .trap import ChainConvergenceError, TrapStabilityError

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


def _load_config(path: str | None) -> ScenarioConfig:
    if path is None:
        return parse_config_text(default_config_text())
    return parse_config_file(path)


def _threads_cap() -> int:
    raw = os.environ.get("BATRAP_THREADS", "1")
    try:
        cap = int(raw)
    except ValueError:
        raise ConfigError(f"BATRAP_THREADS must be an integer, got {raw!r}")
    if cap < 1:
        raise ConfigError("BATRAP_THREADS must be at least 1")
    return cap


def _csv_to_json(text: str) -> str:
    lines = text.strip("\n").split("\n")
    header = lines[0].split(",")
    records = []
    for line in lines[1:]:
        cells = line.split(",")
        record = {}
        for key, cell in zip(header, cells):
            try:
                record[key] = float(cell)
            except ValueError:
                record[key] = cell
        records.append(record)
    return json.dumps(records, sort_keys=True, indent=2) + "\n"


def run_scenario(name: str, config_path: str | None, seed: int, out_dir: str,
                 samples: int | None = None, out_format: str = "csv") -> int:
    """Run one scenario and write its data files plus summary.json.

    Returns the process exit code instead of raising, so it can serve as
    the programmatic entry point.
    """
    try:
        _threads_cap()
        config = _load_config(config_path)
        if samples is not None:
            if samples < 1:
                raise ConfigError("--samples must be positive")
            config.values["run"]["doppler_samples"] = samples
            config.values["loading"]["density_samples"] = max(samples, 1000)
        if name not in scenarios.SCENARIO_NAMES:
            raise ConfigError(
                f"unknown scenario {name!r}; choose from {scenarios.SCENARIO_NAMES}")
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO

    try:
        result = scenarios.run(name, config, seed)
    except (FitError, TrapStabilityError, ChainConvergenceError,
            FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for filename, content in sorted(result.files.items()):
            if out_format == "json" and filename.endswith(".csv"):
                filename = filename[:-4] + ".json"
                content = _csv_to_json(content)
            (out / filename).write_text(content, encoding="utf-8", newline="\n")
    except OSError as err:
        print(f"I/O failure: {err}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _cmd_validate(config_path: str) -> int:
    try:
        report = validate_config(config_path)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_IO
    for key, value in report.entries:
        print(f"{key} = {value}")
    if report.violations:
        for violation in report.violations:
            print(f"violation: {violation}", file=sys.stderr)
        return EXIT_CONFIG
    print("no violations")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="batrap",
        description="Barium trap photoionization-loading simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a named scenario")
    run_p.add_argument("scenario", choices=scenarios.SCENARIO_NAMES)
    run_p.add_argument("--config", default=None, help="scenario config file (INI)")
    run_p.add_argument("--seed", type=int, default=0)
    run_p.add_argument("--out", default="out", help="output directory")
    run_p.add_argument("--samples", type=int, default=None,
                       help="override Monte Carlo sample counts")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv",
                       dest="out_format")

    val_p = sub.add_parser("validate", help="check a config file")
    val_p.add_argument("--config", required=True)

    sub.add_parser("registry", help="dump the isotope registry as JSON")
    sub.add_parser("default-config", help="print the default scenario config")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return run_scenario(args.scenario, args.config, args.seed, args.out,
                            samples=args.samples, out_format=args.out_format)
    if args.command == "validate":
        return _cmd_validate(args.config)
    if args.command == "registry":
        print(registry_to_json())
        return EXIT_OK
    if args.command == "default-config":
        print(default_config_text(), end="")
        return EXIT_OK
    return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
