"""Command-line entry point.

Subcommands:

* ``trace``   - one time evolution, emits trace.csv
* ``sweep``   - scan omega_z, emits sweep.csv
* ``scaling`` - fluctuation-scaling study, emits scaling.csv + fit.json
* ``modes``   - ion-chain normal-mode report, emits modes.csv

Every run also emits a manifest.json with per-output checksums. Exit
codes: 0 success, 2 configuration error, 3 resource (memory budget)
error, 4 numerical failure.
"""

import argparse
import dataclasses
import json
import sys

from . import runner
from .errors import (
    BudgetExceededError,
    ConfigError,
    EigensolverError,
    EmptyShellError,
    IonThermError,
    NumericalConsistencyError,
    SolverFailureError,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_NUMERICAL = 4


def build_parser():
    parser = argparse.ArgumentParser(
        prog="iontherm",
        description="Exact-diagonalization runs for the spin-boson "
                    "thermalization study",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (
        ("trace", True), ("sweep", True), ("scaling", False), ("modes", True),
    ):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", required=needs_config,
                         help="JSON configuration file")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--workers", type=int, default=None,
                         help="process count for independent points")
        cmd.add_argument("--seed", type=int, default=None,
                         help="override the configured seed")
        cmd.add_argument("--budget-gib", type=float, default=None,
                         help="override the memory budget (GiB)")
    return parser


def _apply_overrides(config, args):
    overrides = {}
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.budget_gib is not None:
        overrides["memory_budget_gib"] = args.budget_gib
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _fail(message, code):
    print(f"iontherm: error: {json.dumps(message)}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "scaling":
            grid = None
            if args.config:
                cfg = _read_json(args.config)
                grid = cfg.get("grid")
            manifest = runner.run_scaling(args.out, grid=grid)
        else:
            config = _apply_overrides(runner.load_config(args.config), args)
            if args.command == "trace":
                manifest = runner.run_trace(config, args.out)
            elif args.command == "sweep":
                manifest = runner.run_sweep(config, args.out)
            else:
                manifest = runner.run_modes(config, args.out)
    except ConfigError as exc:
        return _fail({"kind": "config", "detail": str(exc)}, EXIT_CONFIG)
    except BudgetExceededError as exc:
        return _fail(
            {"kind": "resource", "detail": str(exc),
             "required_bytes": exc.required_bytes,
             "budget_bytes": exc.budget_bytes},
            EXIT_RESOURCE,
        )
    except (SolverFailureError, EigensolverError, EmptyShellError,
            NumericalConsistencyError) as exc:
        return _fail({"kind": "numerical", "detail": str(exc)}, EXIT_NUMERICAL)
    except IonThermError as exc:
        return _fail({"kind": "numerical", "detail": str(exc)}, EXIT_NUMERICAL)
    except ValueError as exc:
        return _fail({"kind": "numerical", "detail": str(exc)}, EXIT_NUMERICAL)

    for name in manifest["outputs"]:
        print(f"wrote {name}")
    print("wrote manifest.json")
    return EXIT_OK


def _read_json(path):
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


if __name__ == "__main__":
    sys.exit(main())
