"""Push a 20 kg box to a target directly behind the robot.

The hardest kind of goal: the robot starts facing away from it, so it has to
turn the object nearly 180 degrees while keeping it on the front bumper.  The
script runs the reactive strategy once, prints the phase timeline (approach,
pushing, realignment episodes, contact-type switches), and writes the trace
for external plotting.  Run the same scenario with mode="nps" to watch the
baseline lose the object instead.
"""
from pathlib import Path

import numpy as np

from pushbench.trial import STATUS_NAME, ScenarioConfig, run_trial, write_trace

cfg = ScenarioConfig(
    object_kind="uniform_box",
    friction_set="S1",
    target=(-2.0, 0.0),
    mode="rps",
)
result = run_trial(cfg, keep_trace=True)
trace = result.trace

print(f"outcome:              {result.outcome}")
print(f"completion time:      {result.end_time:.1f} s")
print(f"min contact-target:   {result.min_distance:.3f} m")
print(f"mean |offset| (D):    {result.deviation:.3f} m")
print(f"realignment episodes: {result.realignments}")
print(f"contact-type switches:{result.contact_transitions}")
print()

# Compress the per-tick status stream into readable phases.
print("phase timeline:")
status = trace.status
start = 0
for i in range(1, len(status) + 1):
    if i == len(status) or status[i] != status[start]:
        t0, t1 = trace.time[start], trace.time[i - 1]
        if t1 - t0 >= 0.5:  # hide sub-second flickers
            print(f"  {t0:7.1f} .. {t1:7.1f} s  {STATUS_NAME[int(status[start])]}")
        start = i

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)
write_trace(trace, out / "rear_target_rps.jsonl")
print(f"\nwrote {out / 'rear_target_rps.jsonl'}")
print("replay it with: pushbench replay --trace demos/out/rear_target_rps.jsonl "
      "--emit csv --out demos/out/rear_target_rps.csv")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    pass
else:
    fig, axes = plt.subplots(1, 2, figsize=(11, 4), constrained_layout=True)
    axes[0].plot(trace.robot[:, 0], trace.robot[:, 1], label="robot")
    axes[0].plot(trace.object[:, 0], trace.object[:, 1], label="object")
    axes[0].plot(*cfg.target, "r*", ms=14, label="target")
    axes[0].set_aspect("equal")
    axes[0].set_title("paths")
    axes[0].legend()
    realigning = trace.status == 2
    axes[1].plot(trace.time, trace.lateral, lw=0.8, label="contact offset")
    axes[1].fill_between(trace.time, -0.3, 0.3, where=realigning,
                         alpha=0.2, color="tab:blue", label="realignment")
    for y in (0.24, -0.24):
        axes[1].axhline(y, ls="--", c="gray", lw=0.8)
    axes[1].set_xlabel("time [s]")
    axes[1].set_title("contact offset and realignment episodes")
    axes[1].legend()
    fig.savefig(out / "rear_target_rps.png", dpi=130)
    print(f"wrote {out / 'rear_target_rps.png'}")
