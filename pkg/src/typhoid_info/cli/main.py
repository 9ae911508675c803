"""Command-line entry point: ``typhoid {simulate,analyze,compare,sweep,phase}``."""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .commands import EXIT_INPUT, cmd_analyze, cmd_compare, cmd_phase, cmd_simulate, cmd_sweep
from .config import ConfigError, ScenarioConfig, SweepSpec, apply_overrides, parse_config


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", action="append", default=[], metavar="PATH",
                   help="scenario file (compare accepts it twice: A then B)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", dest="overrides",
                   help="override a config value; repeatable")
    p.add_argument("--t-end", type=float, help="horizon in weeks")
    p.add_argument("--dt", type=float, help="(initial) step size in weeks")
    p.add_argument("--method", choices=("rk4", "rk45"))
    p.add_argument("--json", action="store_true", help="machine-readable output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="typhoid", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one scenario and write t,S,I,R,B,N")
    _common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")

    p = sub.add_parser("analyze", help="R0, equilibria and stability report")
    _common(p)
    p.add_argument("--out")

    p = sub.add_parser("compare", help="run two scenarios on a shared grid")
    _common(p)
    p.add_argument("--set-b", action="append", default=[], metavar="KEY=VALUE",
                   help="override applied to scenario B only")
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")
    p.add_argument("--threshold", type=float,
                   help="I threshold for time-above-threshold (default: 10%% of A's peak)")

    p = sub.add_parser("sweep", help="R0, endemic state and peak I over one parameter")
    _common(p)
    p.add_argument("--param", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--values", help="comma-separated list")
    group.add_argument("--grid", nargs=3, metavar=("START", "STOP", "COUNT"))
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)

    p = sub.add_parser("phase", help="write t,I,B for the I-versus-B curve")
    _common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", action="store_true")
    return parser


def _load(path, args, extra=()) -> ScenarioConfig:
    cfg = parse_config(Path(path).read_text(encoding="utf-8")) if path else ScenarioConfig()
    solver = {}
    if args.t_end is not None:
        solver["t_end"] = args.t_end
    if args.dt is not None:
        solver["dt"] = args.dt
    if args.method is not None:
        solver["method"] = args.method
    overrides = [f"solver.{k}={v}" for k, v in solver.items()] + list(args.overrides) + list(extra)
    return apply_overrides(cfg, overrides) if overrides else cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    limit = 2 if args.command == "compare" else 1
    if len(args.config) > limit:
        print(f"error: {args.command} takes at most {limit} --config", file=sys.stderr)
        return EXIT_INPUT
    try:
        cfg = _load(args.config[0] if args.config else None, args)
        if args.command == "compare":
            if len(args.config) == 2:
                cfg_b = _load(args.config[1], args, args.set_b)
            else:
                cfg_b = apply_overrides(cfg, args.set_b) if args.set_b else cfg
                if args.set_b and cfg_b.label == cfg.label:
                    cfg_b = dataclasses.replace(cfg_b, label=f"{cfg.label} ({', '.join(args.set_b)})")
        if args.command == "sweep":
            if args.values is not None:
                values = [float(v) for v in args.values.split(",") if v.strip()]
                spec = SweepSpec(args.param, values, cfg)
            else:
                start, stop, count = args.grid
                spec = SweepSpec.grid(args.param, float(start), float(stop), int(count), cfg)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "simulate":
        return cmd_simulate(cfg, args.out, svg=args.svg)
    if args.command == "analyze":
        return cmd_analyze(cfg, as_json=args.json, out=args.out)
    if args.command == "compare":
        return cmd_compare(cfg, cfg_b, args.out, threshold=args.threshold, svg=args.svg, as_json=args.json)
    if args.command == "sweep":
        return cmd_sweep(spec, args.out, jobs=args.jobs)
    return cmd_phase(cfg, args.out, svg=args.svg)


if __name__ == "__main__":
    sys.exit(main())
