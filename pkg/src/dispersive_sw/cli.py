"""Command line entry point.

    dispersive-sw run --scenario soliton --model bbm_bbm --order 4 ...
    dispersive-sw run --config config.yaml --check

Exit codes: 0 success, 1 configuration error, 2 runtime/solver failure,
3 threshold failure in --check mode.
"""

from __future__ import annotations

import argparse
import sys

from .config import MODELS, SCENARIOS, config_from_mapping, load_config_file
from .errors import ConfigurationError, DispersiveSwError
from .scenarios import run_scenario


def _parse_list(text, cast):
    return [cast(part) for part in text.split(",") if part.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dispersive-sw",
        description="Structure-preserving solvers for dispersive shallow water models",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario")
    run.add_argument("--config", help="YAML config file; flags override its values")
    run.add_argument("--scenario", choices=SCENARIOS)
    run.add_argument("--model", choices=MODELS)
    run.add_argument("--variant")
    run.add_argument("--order", type=int)
    run.add_argument("--orders", type=lambda s: _parse_list(s, int),
                     help="comma separated operator orders (EOC mode)")
    run.add_argument("--resolutions", type=lambda s: _parse_list(s, int),
                     help="comma separated grid sizes (EOC mode)")
    run.add_argument("--n-nodes", dest="n_nodes", type=int)
    run.add_argument("--t-end", dest="t_end", type=float)
    run.add_argument("--dt", type=float, help="fixed step size (default: adaptive)")
    run.add_argument("--atol", type=float)
    run.add_argument("--rtol", type=float)
    run.add_argument("--parameter-set", dest="parameter_set")
    run.add_argument("--wavenumber", type=float)
    run.add_argument("--gauges", type=lambda s: _parse_list(s, float),
                     help="comma separated gauge positions")
    run.add_argument("--gauge-interval", dest="gauge_interval", type=float)
    run.add_argument("--output-dir", dest="output_dir")
    run.add_argument("--seed", type=int)
    run.add_argument("--experimental-data", dest="experimental_data")
    run.add_argument("--relaxation", action="store_true", default=None)
    run.add_argument("--no-relaxation", dest="relaxation", action="store_false")
    run.add_argument("--reflecting", action="store_true", default=None)
    run.add_argument("--eoc", action="store_true", default=None)
    run.add_argument("--check", action="store_true", default=None,
                     help="assert scenario thresholds; exit 3 on failure")
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        mapping = {}
        if args.config:
            mapping.update(load_config_file(args.config))
        for key, value in vars(args).items():
            if key in ("command", "config") or value is None:
                continue
            mapping[key] = value
        cfg = config_from_mapping(mapping)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1

    import os

    if cfg.output_dir is None:
        cfg.output_dir = os.environ.get("DISPERSIVE_SW_OUTPUT_DIR")

    try:
        result = run_scenario(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 1
    except DispersiveSwError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return 2

    for key, value in sorted(result.info.items()):
        print(f"{key}: {value}")
    if cfg.output_dir:
        print(f"outputs written to {cfg.output_dir}")
    if cfg.check:
        failed = False
        for check in result.checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"{status}: {check.name} value={check.value:.6e} "
                  f"threshold={check.threshold:.6e}")
            failed = failed or not check.passed
        if failed:
            return 3
    return 0


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
