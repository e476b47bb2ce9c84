"""Command-line scenario runner and figure-data emitter.

    opiniongas run --preset a1 --out runs/a1
    opiniongas run --preset c1 --delta-amp 11.5 --out runs/c1_da11p5
    opiniongas run --config my_run.json --out runs/custom --seed 7
    opiniongas run --preset d-grid --out runs/dgrid --mode parallel
    opiniongas plot --figure fig7-left --runs runs --out plots
    opiniongas presets

Every run directory receives timeseries.csv, histogram snapshots, and a
manifest.json that reproduces the run bit-exactly (single-threaded mode).
"""

from __future__ import annotations

import argparse
import sys

from .presets import PRESET_NAMES, build_preset
from .runio import ConfigError, FIGURES, emit_plotdata, load_config, run_preset, run_scenario


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opiniongas",
                                     description="bounded opinion gas simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a preset or a config file")
    src = p_run.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=PRESET_NAMES, help="published scenario name")
    src.add_argument("--config", help="path to a JSON run configuration")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--seed", type=int, help="override the RNG seed")
    p_run.add_argument("--particles", type=int, help="override the particle count")
    p_run.add_argument("--delta-amp", type=float, help="override the kick amplitude")
    p_run.add_argument("--t-end", type=float, help="override the horizon")
    p_run.add_argument("--dt", type=float, help="override the time step")
    p_run.add_argument("--mode", choices=("deterministic", "parallel"),
                       default="deterministic",
                       help="parallel runs group members concurrently (same results)")

    p_plot = sub.add_parser("plot", help="emit figure data from completed runs")
    p_plot.add_argument("--figure", required=True, choices=sorted(FIGURES),
                        help="figure identifier")
    p_plot.add_argument("--runs", required=True, help="directory containing run outputs")
    p_plot.add_argument("--out", help="where to write the figure CSVs (default: --runs)")

    sub.add_parser("presets", help="list available presets")
    return parser


def _overrides(args) -> dict:
    out = {}
    if args.seed is not None:
        out["seed"] = args.seed
    if args.particles is not None:
        out["n_particles"] = args.particles
    if args.delta_amp is not None:
        out["delta_amp"] = args.delta_amp
    if args.t_end is not None:
        out["t_end"] = args.t_end
    if args.dt is not None:
        out["dt"] = args.dt
    return out

def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            for name in PRESET_NAMES:
                built = build_preset(name)
                kind = type(built).__name__
                print(f"{name:8s} {kind}")
            return 0
        if args.command == "run":
            if args.preset is not None:
                man = run_preset(args.preset, args.out, overrides=_overrides(args),
                                 mode=args.mode)
            else:
                config = load_config(args.config)
                ov = _overrides(args)
                if ov:
                    from dataclasses import replace

                    config = replace(config, **ov)
                man = run_scenario(config, args.out)
            print(f"wrote {args.out} ({man.get('preset') or 'config run'})")
            return 0
        paths = emit_plotdata(args.runs, args.figure, args.out)
        for p in paths:
            print(f"wrote {p}")
        return 0
    except (ConfigError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
