"""Command-line entry point: generate | simulate | ingest | analyze | plot-data.

Exit codes: 0 success, 2 configuration error, 3 infeasible routing
instance, 4 backend cap exceeded.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import replace

from .experiment import (ConfigError, ExperimentConfig, cmd_analyze,
                         cmd_generate, cmd_ingest, cmd_simulate, load_config)
from .routing import RoutingInfeasible
from .simulator import SimulatorCapError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_BACKEND_CAP = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ssbv",
        description="Single-shot Bernstein-Vazirani speedup pipeline")
    parser.add_argument("--config", help="experiment config file")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--out", default="ssbv-run", help="output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    for name, doc in (("generate", "write routed circuit files"),
                      ("simulate", "run the trajectory backend"),
                      ("analyze", "TTS curves, exponent fits, report"),
                      ("plot-data", "re-emit columnar plot files")):
        p = sub.add_parser(name, help=doc)
        _add_overrides(p)
    p = sub.add_parser("ingest", help="validate external count files")
    p.add_argument("paths", nargs="+", help="count files or directories")
    return parser


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-min", type=int, dest="n_min")
    p.add_argument("--n-max", type=int, dest="n_max")
    p.add_argument("--oracles", dest="oracle_mode",
                   choices=["representative", "all"])
    p.add_argument("--layout", help="chain | heavy-hex-27 | file:<path>")
    p.add_argument("--profile", help="montreal | cairo | noiseless | <path>")
    p.add_argument("--blacklist", help="comma-separated physical nodes")
    p.add_argument("--dd", help="none | ur4 | ur14 | ur18 | ur:<n>")
    p.add_argument("--dd-pulse-duration", type=int, dest="dd_pulse_duration_dt")
    p.add_argument("--dd-fallback", dest="dd_fallback",
                   choices=["ladder", "idle"])
    p.add_argument("--collection", choices=["direct", "reduced"])
    p.add_argument("--setup", choices=["reduced", "standard"])
    p.add_argument("--shots", type=int)
    p.add_argument("--precision", choices=["double", "single"])


_OVERRIDE_KEYS = ("n_min", "n_max", "oracle_mode", "layout", "profile",
                  "blacklist", "dd", "dd_pulse_duration_dt", "dd_fallback",
                  "collection", "setup", "shots", "precision")


def _config_from_args(args) -> ExperimentConfig:
    config = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {key: getattr(args, key) for key in _OVERRIDE_KEYS
                 if getattr(args, key, None) is not None}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    try:
        return replace(config, **overrides)
    except ConfigError:
        raise
    except Exception as exc:  # dataclass replace surfaces validation errors
        raise ConfigError(str(exc)) from None


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "ingest":
            manifest = cmd_ingest(args.paths, args.out)
            print(f"ingested; manifest at {manifest}")
            return EXIT_OK
        config = _config_from_args(args)
        if args.command == "generate":
            manifest = cmd_generate(config, args.out)
            print(f"circuits written; manifest at {manifest}")
        elif args.command == "simulate":
            manifest = cmd_simulate(config, args.out)
            print(f"tables written; manifest at {manifest}")
        elif args.command in ("analyze", "plot-data"):
            result = cmd_analyze(config, args.out)
            if args.command == "analyze":
                sys.stdout.write(result.report_text)
            else:
                print(f"plot data written under {args.out}/plotdata")
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RoutingInfeasible as exc:
        print(f"infeasible instance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SimulatorCapError as exc:
        print(f"backend cap: {exc}", file=sys.stderr)
        return EXIT_BACKEND_CAP


if __name__ == "__main__":
    raise SystemExit(main())
