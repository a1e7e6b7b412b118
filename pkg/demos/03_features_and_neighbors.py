#!/usr/bin/env python3
"""Inspect the neighbor slots and the 12/22-dimensional feature vector.

Places a handful of vehicles around an ego car, prints the slot assignment
(preceding, rear, left/right front and rear, alongside), the default feature
vector, and the traffic-factor inputs with their absent-neighbor conventions.
"""

import numpy as np

from laneintent import (
    AUGMENTED_FEATURE_NAMES,
    FEATURE_NAMES,
    Sequence,
    VehicleState,
    equal_lane_site,
    neighbor_features,
    neighbors_at,
    traffic_factor_inputs,
)
from laneintent.features import FeatureConfig, step_features

site = equal_lane_site(3)


def car(vid, x, y, lane, v):
    return VehicleState(vid, frame=0, local_x=x, local_y=y, lane_id=lane,
                        velocity=v, acceleration=0.0, length=4.5, width=1.8)


# Ego in the middle lane with traffic on all sides.
scene = Sequence(site, [
    car(1, site.lane_center(2), 100.0, 2, 25.0),   # ego
    car(2, site.lane_center(2), 132.0, 2, 22.0),   # preceding, slower
    car(3, site.lane_center(3), 121.0, 3, 29.0),   # left front, faster
    car(4, site.lane_center(3), 84.0, 3, 27.0),    # left rear
    car(5, site.lane_center(1), 90.0, 1, 20.0),    # right rear
    car(6, site.lane_center(2), 70.0, 2, 24.0),    # same-lane rear
])

ctx = neighbors_at(scene, 1, 0)
print("slot assignment around the ego vehicle:")
for name in ctx.slot_names:
    slot = getattr(ctx, name)
    if slot.present:
        print(f"  {name.upper():3s}: vehicle {slot.vehicle_id}, "
              f"gap {slot.gap:5.1f} m, speed {slot.speed:4.1f} m/s")
    else:
        print(f"  {name.upper():3s}: absent (gap capped at {slot.gap:.0f} m)")
print(f"left lane exists: {ctx.left_lane_exists}, right lane exists: {ctx.right_lane_exists}")

print("\nneighbor feature block [presence_L, presence_R, d_PL, d_P, d_PR, d_FL, d_F, d_FR]:")
print(" ", np.round(neighbor_features(ctx), 2))

tfi = traffic_factor_inputs(ctx, headway_s=1.5)
print("\ntraffic-factor inputs:")
print(f"  incentive (speed/gap advantages of a change): {np.round(tfi.incentive, 2)}")
print(f"  safety    (rear gaps and closing speeds):     {np.round(tfi.safety, 2)}")
print(f"  tolerance (headway margin d_P - v_E*t_h):     {np.round(tfi.tolerance, 2)}")

print("\nfull default vector (12 dims):")
vec = step_features(scene, 1, 0, heading_deg=0.3)
for name, value in zip(FEATURE_NAMES, vec):
    print(f"  {name:22s} {value:10.3f}")

vec22 = step_features(scene, 1, 0, heading_deg=0.3, cfg=FeatureConfig(augmented=True))
print(f"\naugmented mode appends the {len(AUGMENTED_FEATURE_NAMES) - len(FEATURE_NAMES)} "
      f"factor inputs -> {vec22.shape[0]} dims")

# Absent-neighbor conventions: alone on the road, speed differences vanish
# and every distance sits at the cap.
alone = Sequence(site, [car(1, site.lane_center(2), 100.0, 2, 30.0)])
tfi_alone = traffic_factor_inputs(neighbors_at(alone, 1, 0), headway_s=1.5)
print("\nempty road: incentive", tfi_alone.incentive,
      "safety", tfi_alone.safety, "tolerance", tfi_alone.tolerance)
