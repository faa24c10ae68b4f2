"""Controller response profiles.

Walks through the three ingredients of the reactive pushing law:

1. the logistic lateral rate as a function of the contact offset,
2. how that rate splits a fixed speed budget into forward/lateral velocity,
3. the rotation attenuation used while realigning, and the hysteresis band.

Saves a figure to demos/out/controller_profiles.png when matplotlib is
available, and always prints a small numeric table.
"""
import math
from pathlib import Path

import numpy as np

from pushbench.controller import (
    ControllerParams,
    lateral_rate,
    linear_velocity,
    rotation_scale,
)

params = ControllerParams()
offsets = np.linspace(-0.3, 0.3, 601)

# Far from the target the logistic is live; inside the cutoff it is zeroed.
rates = np.array([lateral_rate(float(o), distance=1.0, params=params)
                  for o in offsets])
scales = np.array([rotation_scale(float(o), params) for o in offsets])

# Velocity split at a fixed 0.05 m/s speed budget.
splits = np.array([linear_velocity(0.05, float(r)) for r in rates])

print("offset [m]   rate     vx [m/s]  vy [m/s]  rot.scale")
for o in (-0.29, -0.24, -0.12, -0.05, 0.0, 0.05, 0.12, 0.24, 0.29):
    r = lateral_rate(o, 1.0, params)
    vx, vy = linear_velocity(0.05, r)
    print(f"{o:+.2f}       {r:+7.3f}  {vx:7.4f}   {vy:+8.4f}  {rotation_scale(o, params):.3f}")

print()
print(f"hysteresis: realignment enters past |offset| > {params.critical_offset} m")
print(f"            and holds until |offset| <= {params.middle_offset} m")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not available; skipping the figure")
else:
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.2), constrained_layout=True)
    axes[0].plot(offsets, rates)
    axes[0].set_title("lateral rate vs offset")
    axes[0].set_xlabel("contact offset [m]")
    axes[0].axvline(params.rate_inflection, ls="--", c="gray", lw=0.8)
    axes[0].axvline(-params.rate_inflection, ls="--", c="gray", lw=0.8)

    axes[1].plot(offsets, splits[:, 0], label="vx")
    axes[1].plot(offsets, splits[:, 1], label="vy")
    axes[1].set_title("velocity split at 0.05 m/s")
    axes[1].set_xlabel("contact offset [m]")
    axes[1].legend()

    axes[2].plot(offsets, scales)
    axes[2].set_title("realignment rotation scale")
    axes[2].set_xlabel("contact offset [m]")
    for x in (params.middle_offset, params.critical_offset):
        axes[2].axvline(x, ls="--", c="gray", lw=0.8)
        axes[2].axvline(-x, ls="--", c="gray", lw=0.8)

    out = Path(__file__).parent / "out"
    out.mkdir(exist_ok=True)
    fig.savefig(out / "controller_profiles.png", dpi=130)
    print(f"wrote {out / 'controller_profiles.png'}")
