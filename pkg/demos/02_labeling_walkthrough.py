#!/usr/bin/env python3
"""Follow the labeling rule end to end on one lane change.

Detect the boundary-crossing frame, compute the smoothed heading series,
bound the maneuver with the heading threshold, and label every step. The
plot shows exactly which frames the threshold captures.
"""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from laneintent import (
    LabelingConfig,
    LaneChangeScript,
    Maneuver,
    ScenarioSpec,
    VehicleScript,
    equal_lane_site,
    find_cross_points,
    generate,
    heading_series,
    label_steps,
    maneuver_window,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

site = equal_lane_site(3)
spec = ScenarioSpec(
    seed=7,
    duration_s=60.0,
    site=site,
    vehicles=(
        VehicleScript(
            vehicle_id=1, lane=1, speed=25.0,
            changes=(LaneChangeScript(start_s=28.0, direction=Maneuver.LEFT),),
        ),
    ),
    jitter_amplitude=0.05,
)
seq, truth = generate(spec)
cfg = LabelingConfig()  # delta_t 2 s, theta_bound 2 deg, smoothing 0.5 s

# 1. Cross points: where the lateral centroid switches boundary side.
crosses = find_cross_points(seq)
print(f"cross points: {[(c.vehicle_id, c.frame, c.direction.label) for c in crosses]}")
print(f"ground truth cross frame: {truth[0].cross_frame}")
assert crosses[0].frame == truth[0].cross_frame

# 2. Heading: centered differences, then a short moving average.
theta = heading_series(seq, 1, cfg.heading_smooth_window)
frames = np.array([s.frame for s in seq.trajectory(1)])
print(f"peak |heading| = {np.abs(theta).max():.2f} deg "
      f"(threshold is {cfg.theta_bound} deg)")

# 3. The maneuver window is the maximal contiguous super-threshold run
#    containing the cross point, inside +/- delta_t.
event = maneuver_window(seq, crosses[0], cfg, theta)
print(f"maneuver window: frames [{event.start_frame}, {event.end_frame}] "
      f"around cross {event.cross_frame} "
      f"({(event.end_frame - event.start_frame) / seq.frame_rate:.1f} s wide)")

# 4. Step labels: window frames carry the direction, the rest follow.
labels = label_steps(seq, [event])
n_left = sum(1 for sl in labels if sl.label == Maneuver.LEFT)
print(f"labels: {n_left} left steps, {len(labels) - n_left} follow steps")
assert n_left == event.end_frame - event.start_frame + 1

# Shrinking the threshold can only widen the window.
for bound in (3.0, 2.0, 1.0):
    ev = maneuver_window(seq, crosses[0], LabelingConfig(theta_bound=bound), theta)
    print(f"  theta_bound {bound:.0f} deg -> window width "
          f"{(ev.end_frame - ev.start_frame) / seq.frame_rate:.1f} s")

fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(9, 5), sharex=True)
xs = np.array([s.local_x for s in seq.trajectory(1)])
ax1.plot(frames / seq.frame_rate, xs)
ax1.axhline(site.lane_boundaries[1], color="gray", ls="--", lw=0.8)
ax1.axvline(event.cross_frame / seq.frame_rate, color="red", lw=0.8)
ax1.set_ylabel("lateral position (m)")
ax2.plot(frames / seq.frame_rate, theta)
for sign in (+1, -1):
    ax2.axhline(sign * cfg.theta_bound, color="orange", ls=":", lw=0.8)
ax2.axvspan(event.start_frame / seq.frame_rate, event.end_frame / seq.frame_rate,
            color="orange", alpha=0.2)
ax2.set_xlabel("time (s)")
ax2.set_ylabel("heading (deg)")
fig.tight_layout()
fig.savefig(OUT / "labeling.png", dpi=120)
print(f"plot saved to {OUT / 'labeling.png'}")
