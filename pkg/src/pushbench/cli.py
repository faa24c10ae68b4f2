"""Command line interface: campaign batches, single scenarios, trace replay."""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .campaign import (
    export_csv,
    export_json,
    generate_grid_targets,
    generate_ring_targets,
    run_campaign,
)
from .objects import FRICTION_SETS, OBJECT_KINDS
from .trial import KIND_NAME, STATUS_NAME, ScenarioConfig, read_trace, run_trial

TRACE_CSV_COLUMNS = (
    "t", "robot_x", "robot_y", "robot_theta", "object_x", "object_y",
    "object_theta", "contact", "kind", "point_x", "point_y", "lateral",
    "status", "rate", "steering", "rotation_scale", "distance",
    "raw_vx", "raw_vy", "raw_omega", "cmd_vx", "cmd_vy", "cmd_omega",
    "penetration", "normal_force",
)


def _csv_value(x) -> str:
    import math

    if isinstance(x, float) and math.isnan(x):
        return ""
    return repr(x) if isinstance(x, float) else str(x)


def trace_to_csv(trace, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_CSV_COLUMNS)
    for i in range(len(trace)):
        writer.writerow([_csv_value(v) for v in (
            float(trace.time[i]), *map(float, trace.robot[i]),
            *map(float, trace.object[i]), int(trace.contact_exists[i]),
            KIND_NAME[int(trace.contact_kind[i])],
            float(trace.contact_point[i][0]), float(trace.contact_point[i][1]),
            float(trace.lateral[i]), STATUS_NAME[int(trace.status[i])],
            float(trace.rate[i]), float(trace.steering[i]),
            float(trace.rotation_scale[i]), float(trace.distance[i]),
            *map(float, trace.raw_twist[i]), *map(float, trace.command[i]),
            float(trace.penetration[i]), float(trace.normal_force[i]),
        )])


def _cmd_campaign(args) -> int:
    objects = args.objects.split(",") if args.objects else list(OBJECT_KINDS)
    frictions = args.frictions.split(",") if args.frictions else sorted(FRICTION_SETS)
    targets = generate_ring_targets() if args.targets == "ring" else generate_grid_targets()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    overrides = {}
    if args.jitter:
        overrides["lateral_jitter"] = args.jitter
    summary = run_campaign(
        mode=args.mode,
        objects=objects,
        frictions=frictions,
        targets=targets,
        base_seed=args.seed,
        workers=args.workers,
        trace_dir=out / "traces" if args.traces else None,
        overrides=overrides or None,
        progress=args.progress,
    )
    export_csv(summary.results, out / f"trials_{args.mode}.csv")
    export_json(summary, out / f"summary_{args.mode}.json")
    print(f"{args.mode}: {summary.successes}/{summary.n_trials} succeeded "
          f"({summary.success_rate:.2%})")
    for (obj, fric), cell in sorted(summary.cells.items()):
        print(f"  {obj:>15s} {fric}: {cell['successes']}/{cell['n']}")
    print(f"wrote {out / f'trials_{args.mode}.csv'} and {out / f'summary_{args.mode}.json'}")
    return 0


def _cmd_run(args) -> int:
    cfg = ScenarioConfig.load(args.scenario)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    trace_path = None if args.no_trace else out / "trace.jsonl"
    result = run_trial(cfg, trace_path=trace_path)
    print(f"outcome: {result.outcome}")
    print(f"min_distance: {result.min_distance:.4f} m")
    if result.completion_time is not None:
        print(f"completion_time: {result.completion_time:.2f} s")
    print(f"deviation: {result.deviation:.4f} m")
    print(f"realignments: {result.realignments}")
    print(f"contact_transitions: {result.contact_transitions}")
    if trace_path is not None:
        print(f"trace: {trace_path}")
    return 0


def _cmd_replay(args) -> int:
    trace = read_trace(args.trace)
    if args.emit != "csv":
        raise ValueError(f"unknown emit format {args.emit!r}")
    if args.out:
        with open(args.out, "w", newline="") as f:
            trace_to_csv(trace, f)
        print(f"wrote {args.out}")
    else:
        trace_to_csv(trace, sys.stdout)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pushbench",
        description="Tactile-reactive planar pushing workbench.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("campaign", help="run a batch of pushing trials")
    c.add_argument("--mode", choices=["rps", "nps"], required=True)
    c.add_argument("--objects", default=None,
                   help=f"comma list from {','.join(OBJECT_KINDS)} (default: all)")
    c.add_argument("--frictions", default=None,
                   help="comma list from S1,S2 (default: both)")
    c.add_argument("--targets", choices=["grid", "ring"], default="grid")
    c.add_argument("--out", required=True, help="output directory")
    c.add_argument("--workers", type=int, default=None)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--traces", action="store_true",
                   help="write a JSONL trace per trial")
    c.add_argument("--jitter", type=float, default=0.0,
                   help="seeded uniform +- lateral offset of the object start (m)")
    c.add_argument("--progress", action="store_true")
    c.set_defaults(func=_cmd_campaign)

    r = sub.add_parser("run", help="run a single scenario config file")
    r.add_argument("--scenario", required=True)
    r.add_argument("--out", default=".")
    r.add_argument("--no-trace", action="store_true")
    r.set_defaults(func=_cmd_run)

    rp = sub.add_parser("replay", help="convert a trace log for plotting")
    rp.add_argument("--trace", required=True)
    rp.add_argument("--emit", choices=["csv"], default="csv")
    rp.add_argument("--out", default=None)
    rp.set_defaults(func=_cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
