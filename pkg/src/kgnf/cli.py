"""Command line entry point: ``kgnf <experiment> [--config PATH] [--out DIR] [--seed N] [--override k=v]``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import sys

from .cubic import ResonanceError
from .harness import REGISTRY, ConfigError, apply_overrides, config_from_dict, parse_config, run_experiment
from .parametrix import QuadratureError
from .solver import NumericalFailure

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kgnf", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=sorted(REGISTRY))
    ap.add_argument("--config", metavar="PATH", help="JSON config file (defaults apply when omitted)")
    ap.add_argument("--out", metavar="DIR", help="output directory (default <output.dir>/<experiment>)")
    ap.add_argument("--seed", type=int, help="random seed, overrides the config value")
    ap.add_argument("--override", action="append", default=[], metavar="KEY=VALUE",
                    help="set a config value, e.g. solver.rho_end=200 (repeatable)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config) if args.config else config_from_dict({})
        overrides = list(args.override)
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        cfg = apply_overrides(cfg, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        summary = run_experiment(args.experiment, cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, QuadratureError, ResonanceError, FloatingPointError,
            ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    print(json.dumps(summary, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
