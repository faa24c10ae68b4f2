"""Batch campaigns over objects x frictions x targets, aggregation, and export.

A grid campaign pushes every object/friction combination to 24 targets on a
5 x 5 meter lattice around the robot (center excluded); the ring preset uses 8
targets on a 2.1 m circle.  Results export to a per-trial CSV and a nested
JSON summary with stable ordering, so repeated runs with the same seeds are
byte-identical.
"""
from __future__ import annotations

import csv
import math
import multiprocessing
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import Vec2
from .objects import FRICTION_SETS, OBJECT_KINDS
from .trial import OUTCOME_ABORT, OUTCOME_SUCCESS, ScenarioConfig, TrialResult, run_trial

# Success rates reported for the original Gazebo/ODE evaluation of the same
# 144-trial grid; exported alongside our own rates for comparison.
REFERENCE_GRID_SUCCESS_RATE = {"rps": 0.8819, "nps": 0.1597}

# Real-world mean contact-point deviation baselines (box, cylinder), meters.
REFERENCE_DEVIATION = {"box": 0.032, "cylinder": 0.059}

CSV_COLUMNS = (
    "object", "friction", "target_x", "target_y", "mode", "seed", "outcome",
    "min_distance", "completion_time", "deviation", "realignments",
    "contact_transitions", "contact_lost_total", "end_time", "trace",
)


def generate_grid_targets() -> list[Vec2]:
    """The 24 lattice targets: x, y in {-2..2} meters, excluding the origin."""
    return [Vec2(float(x), float(y))
            for x in (-2, -1, 0, 1, 2) for y in (-2, -1, 0, 1, 2)
            if not (x == 0 and y == 0)]


def generate_ring_targets(radius: float = 2.1, count: int = 8) -> list[Vec2]:
    """Targets evenly spaced on a circle around the start, first one straight ahead."""
    out = []
    for k in range(count):
        ang = 2.0 * math.pi * k / count
        out.append(Vec2(radius * math.cos(ang), radius * math.sin(ang)))
    return out


@dataclass
class CampaignSummary:
    mode: str
    n_trials: int
    successes: int
    success_rate: float
    outcome_counts: dict[str, int]
    cells: dict[tuple[str, str], dict]          # (object, friction) -> counts
    per_target: dict[tuple[float, float], dict]  # target -> counts + distances
    results: list[TrialResult] = field(repr=False, default_factory=list)

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_trials": self.n_trials,
            "successes": self.successes,
            "success_rate": self.success_rate,
            "reference_success_rate": REFERENCE_GRID_SUCCESS_RATE.get(self.mode),
            "outcome_counts": dict(sorted(self.outcome_counts.items())),
            "cells": {
                f"{obj}|{fric}": dict(v)
                for (obj, fric), v in sorted(self.cells.items())
            },
            "per_target": {
                f"{x:g},{y:g}": dict(v)
                for (x, y), v in sorted(self.per_target.items())
            },
        }


def build_campaign_configs(
    mode: str,
    objects=OBJECT_KINDS,
    frictions=tuple(sorted(FRICTION_SETS)),
    targets=None,
    base_seed: int = 0,
    overrides: dict | None = None,
) -> list[ScenarioConfig]:
    """One config per object x friction x target; seeds follow the enumeration order."""
    if targets is None:
        targets = generate_grid_targets()
    targets = list(targets)
    if not targets:
        raise ValueError("campaign needs at least one target")
    if not objects or not frictions:
        raise ValueError("campaign needs at least one object and one friction set")
    overrides = overrides or {}
    configs = []
    idx = 0
    for obj in objects:
        for fric in frictions:
            for tgt in targets:
                configs.append(ScenarioConfig(
                    object_kind=obj,
                    friction_set=fric,
                    target=(tgt.x, tgt.y),
                    mode=mode,
                    seed=base_seed + idx,
                    **overrides,
                ))
                idx += 1
    return configs


def _trace_name(cfg: ScenarioConfig) -> str:
    return (f"{cfg.object_kind}_{cfg.friction_set}_{cfg.target[0]:g}_"
            f"{cfg.target[1]:g}_{cfg.mode}_{cfg.seed}.jsonl")


def _abort_result(cfg: ScenarioConfig, end_time: float = 0.0) -> TrialResult:
    return TrialResult(
        object_kind=cfg.object_kind, friction_set=cfg.friction_set,
        target=tuple(cfg.target), mode=cfg.mode, seed=cfg.seed,
        outcome=OUTCOME_ABORT, min_distance=math.nan, completion_time=None,
        deviation=math.nan, realignments=0, contact_transitions=0,
        contact_lost_total=0.0, end_time=end_time)


def _run_one(payload) -> TrialResult:
    cfg_dict, trace_dir = payload
    cfg = ScenarioConfig.from_dict(cfg_dict)
    trace_path = None
    if trace_dir is not None:
        trace_path = str(Path(trace_dir) / _trace_name(cfg))
    try:
        return run_trial(cfg, trace_path=trace_path)
    except Exception as exc:  # a single bad trial must not sink the campaign
        print(f"trial {cfg.object_kind}/{cfg.friction_set}/{cfg.target} aborted: {exc}",
              file=sys.stderr)
        return _abort_result(cfg)


def run_campaign(
    mode: str,
    objects=OBJECT_KINDS,
    frictions=tuple(sorted(FRICTION_SETS)),
    targets=None,
    base_seed: int = 0,
    workers: int | None = None,
    trace_dir: str | Path | None = None,
    overrides: dict | None = None,
    progress: bool = False,
) -> CampaignSummary:
    """Run every trial of a campaign (optionally in parallel) and aggregate.

    Results are deterministic for fixed seeds and independent of ``workers``.
    """
    configs = build_campaign_configs(mode, objects, frictions, targets,
                                     base_seed, overrides)
    if trace_dir is not None:
        Path(trace_dir).mkdir(parents=True, exist_ok=True)
        trace_dir = str(trace_dir)
    payloads = [(cfg.to_dict(), trace_dir) for cfg in configs]

    if workers is None:
        workers = min(8, os.cpu_count() or 1)
    if workers > 1 and len(payloads) > 1:
        ctx = multiprocessing.get_context("fork")
        with ctx.Pool(workers) as pool:
            results = pool.map(_run_one, payloads, chunksize=1)
    else:
        results = []
        for i, payload in enumerate(payloads):
            results.append(_run_one(payload))
            if progress:
                r = results[-1]
                print(f"[{i + 1}/{len(payloads)}] {r.object_kind}/{r.friction_set}"
                      f" -> ({r.target[0]:g},{r.target[1]:g}): {r.outcome}",
                      file=sys.stderr)
    return summarize(mode, results)


def summarize(mode: str, results: list[TrialResult]) -> CampaignSummary:
    results = sorted(results, key=lambda r: r.scenario_key())
    successes = sum(r.outcome == OUTCOME_SUCCESS for r in results)
    outcome_counts: dict[str, int] = {}
    cells: dict[tuple[str, str], dict] = {}
    per_target: dict[tuple[float, float], dict] = {}
    per_target_obj: dict[tuple[float, float], dict[str, list[float]]] = {}
    for r in results:
        outcome_counts[r.outcome] = outcome_counts.get(r.outcome, 0) + 1
        cell = cells.setdefault((r.object_kind, r.friction_set),
                                {"successes": 0, "n": 0})
        cell["n"] += 1
        cell["successes"] += r.outcome == OUTCOME_SUCCESS
        tgt = per_target.setdefault(r.target, {"successes": 0, "n": 0,
                                               "avg_min_distance": None})
        tgt["n"] += 1
        tgt["successes"] += r.outcome == OUTCOME_SUCCESS
        per_target_obj.setdefault(r.target, {}).setdefault(
            r.object_kind, []).append(r.min_distance)
    for target, entry in per_target.items():
        dists = [d for obj in per_target_obj[target].values() for d in obj]
        finite = [d for d in dists if not math.isnan(d)]
        entry["avg_min_distance"] = float(np.mean(finite)) if finite else None
        entry["per_object_avg_min_distance"] = {
            obj: (float(np.mean([d for d in ds if not math.isnan(d)]))
                  if any(not math.isnan(d) for d in ds) else None)
            for obj, ds in sorted(per_target_obj[target].items())
        }
    return CampaignSummary(
        mode=mode,
        n_trials=len(results),
        successes=successes,
        success_rate=successes / len(results) if results else 0.0,
        outcome_counts=outcome_counts,
        cells=cells,
        per_target=per_target,
        results=results,
    )


# --- export -----------------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return ""
        return repr(value)
    return str(value)


def export_csv(results: list[TrialResult], path) -> None:
    """One row per trial, columns per CSV_COLUMNS, sorted by scenario key."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = sorted(results, key=lambda r: r.scenario_key())
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in rows:
            writer.writerow([
                r.object_kind, r.friction_set, _fmt(float(r.target[0])),
                _fmt(float(r.target[1])), r.mode, r.seed, r.outcome,
                _fmt(r.min_distance), _fmt(r.completion_time),
                _fmt(r.deviation), r.realignments, r.contact_transitions,
                _fmt(r.contact_lost_total), _fmt(r.end_time),
                r.trace_path or "",
            ])


def export_json(summary: CampaignSummary, path) -> None:
    import json

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary.to_dict(), indent=2, sort_keys=True) + "\n")
