"""Command-line front end: ``zml <command> --config <path> --out <dir>``."""

from __future__ import annotations

import argparse
import sys

from .config import ExperimentConfig, dump_config, parse_config, parse_text
from .experiments import COMMANDS, ExperimentSpec, run_experiment, sweep

__all__ = [
    "main",
    "ExperimentConfig",
    "ExperimentSpec",
    "parse_config",
    "parse_text",
    "dump_config",
    "run_experiment",
    "sweep",
]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zml", description="zero-mass convection-diffusion experiments")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="experiment configuration file")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--threads", type=int, default=1, help="sweep parallelism")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized data")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    spec = ExperimentSpec(args.command, args.config, args.out, args.seed, args.threads)
    status = run_experiment(spec)
    if status:
        print(f"zml {args.command}: failed (exit {status}); see {args.out}/error.txt", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
