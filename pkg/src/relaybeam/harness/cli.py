"""Command-line entry point: ``relaybeam run | list | validate``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, SEED_MAX, load_config
from .experiments import EXPERIMENTS, preset, run_named
from .output import emit_csv, emit_plot_data


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v <= SEED_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relaybeam", description="Robust relay beamforming experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment and write CSV + plot data")
    run.add_argument("--experiment", required=True, choices=sorted(EXPERIMENTS))
    run.add_argument("--config", type=Path, help="key = value file overriding the experiment defaults")
    run.add_argument("--seed", type=_u64)
    run.add_argument("--trials", type=_positive)
    run.add_argument("--out", type=Path, default=Path("results"))
    run.add_argument("--workers", type=_positive, default=1, help="worker processes for trials")

    sub.add_parser("list", help="list experiments")

    val = sub.add_parser("validate", help="check a config file")
    val.add_argument("--config", type=Path, required=True)
    val.add_argument("--experiment", choices=sorted(EXPERIMENTS), help="validate on top of these defaults")
    return p


def _config_for(args):
    base = preset(args.experiment) if getattr(args, "experiment", None) else None
    cfg = load_config(args.config, base) if args.config else base
    changes = {}
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        changes["trials"] = args.trials
    return cfg.replace(**changes).validate() if changes else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        width = max(map(len, EXPERIMENTS))
        for name, exp in EXPERIMENTS.items():
            print(f"{name:<{width}}  {exp.description}")
        return 0
    try:
        cfg = _config_for(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.command == "validate":
        print(f"ok: {args.config}")
        if cfg.sweep_field:
            print(f"sweep: {cfg.sweep_field} = {', '.join(map(str, cfg.sweep_values))}")
        return 0

    result = run_named(args.experiment, cfg, workers=args.workers)
    try:
        csv_path = emit_csv(result, args.out / f"{args.experiment}.csv")
        plot_csv, sidecar = emit_plot_data(result, args.out / f"{args.experiment}_plot.csv")
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in (csv_path, plot_csv, sidecar):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
