"""Command-line entry point: ``doublelambda <subcommand> --config ... --out ...``."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from ..errors import ConfigError, DoubleLambdaError
from .config import MODES, bundled_configs, load_config
from .runner import EXIT_CONFIG, EXIT_NUMERICAL, _jsonable, run

log = logging.getLogger("doublelambda")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doublelambda",
        description="Double-Lambda two-photon laser: coefficients, moments, entanglement scans.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run a {mode} experiment")
        p.add_argument("--config", required=True,
                       help="JSON config path or bundled name (" + ", ".join(bundled_configs()) + ")")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument("--workers", type=int, default=1, help="worker processes for scans")
        p.add_argument("--seed", type=int, default=None, help="seed for randomized coefficient sets")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(args.config, mode=args.command)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        result = run(cfg, args.out, workers=args.workers, seed=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DoubleLambdaError, ArithmeticError, ValueError) as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    log.info("wrote %s to %s", cfg.output_name, args.out)
    print(json.dumps(_jsonable({"mode": cfg.mode, "exit_code": result.exit_code,
                                "summary": result.summary}), sort_keys=True))
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
