"""Reactive vs non-reactive on a small target fan.

Runs both controller modes over five targets (ahead, diagonal, sideways,
rear-diagonal, straight behind) for the uniform box and prints a side-by-side
table.  A compact version of the full grid campaign:

    pushbench campaign --mode rps --out results/
    pushbench campaign --mode nps --out results/
"""
from pushbench.campaign import run_campaign
from pushbench.geometry import Vec2

targets = [Vec2(2.0, 0.0), Vec2(2.0, 2.0), Vec2(0.0, 2.0),
           Vec2(-2.0, 2.0), Vec2(-2.0, 0.0)]

summaries = {}
for mode in ("rps", "nps"):
    summaries[mode] = run_campaign(
        mode, objects=["uniform_box"], frictions=["S1"], targets=targets,
        workers=4)

by_key = {
    mode: {r.target: r for r in summaries[mode].results}
    for mode in summaries
}

print(f"{'target':>12s} | {'reactive':>22s} | {'non-reactive':>22s}")
print("-" * 64)
for t in targets:
    row = []
    for mode in ("rps", "nps"):
        r = by_key[mode][(t.x, t.y)]
        if r.outcome == "success":
            row.append(f"success in {r.completion_time:5.1f} s")
        else:
            row.append(f"{r.outcome} (min {r.min_distance:.2f} m)")
    print(f"({t.x:+.0f},{t.y:+.0f})      | {row[0]:>22s} | {row[1]:>22s}")

print()
for mode in ("rps", "nps"):
    s = summaries[mode]
    print(f"{mode}: {s.successes}/{s.n_trials} succeeded")
