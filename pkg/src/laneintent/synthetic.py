"""Deterministic multi-vehicle highway scenes with scripted lane changes.

Scenes are desk-scale stand-ins for licensed trajectory recordings: every
vehicle follows a scripted speed profile, holds lane center during keeping
(plus bounded uniform jitter), and executes scripted changes along a cubic
smoothstep from source to target lane center. Ground truth records the exact
frame where the lateral centroid lands on the far side of the dividing
boundary, which makes generated scenes an oracle for the labeling stage.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np

from .ingest import Sequence, SiteGeometry, VehicleState
from .labeling import LaneChangeEvent, Maneuver

DEFAULT_LANE_WIDTH = 3.7


class ScenarioSpecError(ValueError):
    """A vehicle script is inconsistent (overlapping events, bad lanes)."""


def equal_lane_site(lane_count: int, lane_width: float = DEFAULT_LANE_WIDTH,
                    site_name: str = "synthetic") -> SiteGeometry:
    bounds = tuple(lane_width * k for k in range(lane_count + 1))
    return SiteGeometry(lane_boundaries=bounds, site_name=site_name)


def smoothstep(u: np.ndarray | float) -> np.ndarray | float:
    """Cubic ease 3u^2 - 2u^3, clamped to [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    return u * u * (3.0 - 2.0 * u)


@dataclass(frozen=True)
class LaneChangeScript:
    start_s: float
    direction: Maneuver  # LEFT or RIGHT
    duration_s: float = 4.0

    def __post_init__(self) -> None:
        if self.direction == Maneuver.FOLLOW:
            raise ScenarioSpecError("scripted change direction must be LEFT or RIGHT")
        if self.duration_s <= 0:
            raise ScenarioSpecError("change duration must be positive")

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s


@dataclass(frozen=True)
class VehicleScript:
    vehicle_id: int
    lane: int
    speed: float  # initial longitudinal speed, m/s
    entry_s: float = 0.0
    y0: float = 0.0
    accel_phases: tuple[tuple[float, float], ...] = ()  # (start_s, m/s^2), sorted
    changes: tuple[LaneChangeScript, ...] = ()
    length: float = 4.5
    width: float = 1.8

    def __post_init__(self) -> None:
        changes = tuple(sorted(self.changes, key=lambda c: c.start_s))
        object.__setattr__(self, "changes", changes)
        for a, b in zip(changes, changes[1:]):
            if b.start_s < a.end_s:
                raise ScenarioSpecError(
                    f"vehicle {self.vehicle_id}: overlapping change scripts "
                    f"at {a.start_s}s and {b.start_s}s"
                )

    def lane_before(self, change_index: int) -> int:
        lane = self.lane
        for ch in self.changes[:change_index]:
            lane += 1 if ch.direction == Maneuver.LEFT else -1
        return lane


@dataclass(frozen=True)
class ScenarioSpec:
    seed: int
    duration_s: float
    site: SiteGeometry
    vehicles: tuple[VehicleScript, ...]
    frame_rate: float = 10.0
    jitter_amplitude: float = 0.05  # meters, uniform, lane-keeping only

    def __post_init__(self) -> None:
        for script in self.vehicles:
            lane = script.lane
            self.site._check_lane(lane)
            for ch in script.changes:
                lane += 1 if ch.direction == Maneuver.LEFT else -1
                if not 1 <= lane <= self.site.lane_count:
                    raise ScenarioSpecError(
                        f"vehicle {script.vehicle_id}: change at {ch.start_s}s "
                        f"leaves the roadway (lane {lane})"
                    )
                if ch.end_s > self.duration_s:
                    raise ScenarioSpecError(
                        f"vehicle {script.vehicle_id}: change at {ch.start_s}s "
                        f"ends after the scenario"
                    )


def generate(spec: ScenarioSpec) -> tuple[Sequence, list[LaneChangeEvent]]:
    """Build the scene and its exact ground-truth lane-change events.

    Deterministic given the spec (including its seed). Ground-truth cross
    frames come from the generated lateral series itself: the first frame on
    the far side of the dividing boundary, with "far side" meaning
    ``x >= boundary`` for a left change and ``x < boundary`` for a right one.
    """
    rng = np.random.default_rng(spec.seed)
    dt = 1.0 / spec.frame_rate
    last_frame = int(round(spec.duration_s * spec.frame_rate))

    states: list[VehicleState] = []
    ground_truth: list[LaneChangeEvent] = []
    for script in spec.vehicles:
        entry_frame = int(round(script.entry_s * spec.frame_rate))
        frames = np.arange(entry_frame, last_frame + 1)
        times = frames * dt

        accel = np.zeros(len(frames))
        for start_s, a in sorted(script.accel_phases):
            accel[times >= start_s] = a
        speed = np.maximum(script.speed + np.cumsum(np.r_[0.0, accel[:-1]]) * dt, 0.0)
        ys = script.y0 + np.cumsum(np.r_[0.0, speed[:-1]]) * dt

        xs = np.full(len(frames), spec.site.lane_center(script.lane))
        keeping = np.ones(len(frames), dtype=bool)
        for k, ch in enumerate(script.changes):
            src = script.lane_before(k)
            dst = src + 1 if ch.direction == Maneuver.LEFT else src - 1
            c_src, c_dst = spec.site.lane_center(src), spec.site.lane_center(dst)
            inside = (times >= ch.start_s) & (times <= ch.end_s)
            u = (times - ch.start_s) / ch.duration_s
            xs[inside] = c_src + (c_dst - c_src) * smoothstep(u[inside])
            xs[times > ch.end_s] = c_dst
            keeping &= ~inside

        jitter = rng.uniform(-spec.jitter_amplitude, spec.jitter_amplitude, size=len(frames))
        xs = xs + np.where(keeping, jitter, 0.0)

        for k, ch in enumerate(script.changes):
            src = script.lane_before(k)
            dst = src + 1 if ch.direction == Maneuver.LEFT else src - 1
            boundary = spec.site.boundary_between(src, dst)
            on_far_side = xs >= boundary if ch.direction == Maneuver.LEFT else xs < boundary
            crossed = np.flatnonzero(on_far_side & (times >= ch.start_s))
            cross_frame = int(frames[crossed[0]])
            ground_truth.append(
                LaneChangeEvent(
                    vehicle_id=script.vehicle_id,
                    cross_frame=cross_frame,
                    start_frame=int(round(ch.start_s * spec.frame_rate)),
                    end_frame=int(round(ch.end_s * spec.frame_rate)),
                    direction=ch.direction,
                )
            )

        for i, frame in enumerate(frames):
            states.append(
                VehicleState(
                    vehicle_id=script.vehicle_id,
                    frame=int(frame),
                    local_x=float(xs[i]),
                    local_y=float(ys[i]),
                    lane_id=spec.site.lane_of(float(xs[i])),
                    velocity=float(speed[i]),
                    acceleration=float(accel[i]),
                    length=script.length,
                    width=script.width,
                )
            )

    seq = Sequence(spec.site, states, frame_rate=spec.frame_rate,
                   start_frame=0, end_frame=last_frame)
    return seq, ground_truth


def write_table(seq: Sequence, path: Union[str, Path]) -> None:
    """Write the scene in the ingestion table format (meters, whitespace)."""
    header = "Vehicle_ID Frame_ID Local_X Local_Y v_Vel v_Acc Lane_ID v_Length v_Width"
    lines = [header]
    for st in sorted(seq.all_states(), key=lambda s: (s.vehicle_id, s.frame)):
        lines.append(
            f"{st.vehicle_id} {st.frame} {st.local_x!r} {st.local_y!r} "
            f"{st.velocity!r} {st.acceleration!r} {st.lane_id} {st.length!r} {st.width!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


# --- text config round-trip ------------------------------------------------

_SPEC_KEYS = {"seed", "duration_s", "lane_count", "lane_width", "frame_rate",
              "jitter_amplitude", "vehicles", "site_name"}
_VEHICLE_KEYS = {"vehicle_id", "lane", "speed", "entry_s", "y0",
                 "accel_phases", "changes", "length", "width"}
_CHANGE_KEYS = {"start_s", "direction", "duration_s"}


def _reject_unknown(mapping: dict, allowed: set[str], context: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise ScenarioSpecError(f"unknown keys in {context}: {sorted(unknown)}")


def spec_to_file(spec: ScenarioSpec, path: Union[str, Path]) -> None:
    doc = {
        "seed": spec.seed,
        "duration_s": spec.duration_s,
        "lane_count": spec.site.lane_count,
        "lane_width": spec.site.lane_width(1),
        "site_name": spec.site.site_name,
        "frame_rate": spec.frame_rate,
        "jitter_amplitude": spec.jitter_amplitude,
        "vehicles": [
            {
                "vehicle_id": v.vehicle_id,
                "lane": v.lane,
                "speed": v.speed,
                "entry_s": v.entry_s,
                "y0": v.y0,
                "accel_phases": [list(p) for p in v.accel_phases],
                "changes": [
                    {"start_s": c.start_s, "direction": c.direction.label,
                     "duration_s": c.duration_s}
                    for c in v.changes
                ],
                "length": v.length,
                "width": v.width,
            }
            for v in spec.vehicles
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")


def spec_from_file(path: Union[str, Path]) -> ScenarioSpec:
    doc = json.loads(Path(path).read_text())
    _reject_unknown(doc, _SPEC_KEYS, "scenario spec")
    vehicles = []
    for v in doc.get("vehicles", []):
        _reject_unknown(v, _VEHICLE_KEYS, "vehicle script")
        changes = []
        for c in v.get("changes", []):
            _reject_unknown(c, _CHANGE_KEYS, "change script")
            changes.append(
                LaneChangeScript(
                    start_s=float(c["start_s"]),
                    direction=Maneuver.from_label(c["direction"]),
                    duration_s=float(c.get("duration_s", 4.0)),
                )
            )
        vehicles.append(
            VehicleScript(
                vehicle_id=int(v["vehicle_id"]),
                lane=int(v["lane"]),
                speed=float(v["speed"]),
                entry_s=float(v.get("entry_s", 0.0)),
                y0=float(v.get("y0", 0.0)),
                accel_phases=tuple(
                    (float(a), float(b)) for a, b in v.get("accel_phases", [])
                ),
                changes=tuple(changes),
                length=float(v.get("length", 4.5)),
                width=float(v.get("width", 1.8)),
            )
        )
    site = equal_lane_site(
        int(doc["lane_count"]),
        float(doc.get("lane_width", DEFAULT_LANE_WIDTH)),
        doc.get("site_name", "synthetic"),
    )
    return ScenarioSpec(
        seed=int(doc["seed"]),
        duration_s=float(doc["duration_s"]),
        site=site,
        vehicles=tuple(vehicles),
        frame_rate=float(doc.get("frame_rate", 10.0)),
        jitter_amplitude=float(doc.get("jitter_amplitude", 0.05)),
    )


# --- randomized corpora ----------------------------------------------------

def random_scenario(
    seed: int,
    lane_count: int = 3,
    n_vehicles: int = 3,
    duration_s: float = 60.0,
    frame_rate: float = 10.0,
    jitter_amplitude: float = 0.05,
    max_changes: int = 2,
    change_duration_s: float = 4.0,
) -> ScenarioSpec:
    """Script a valid random scenario: staggered vehicles, spaced changes.

    Change start times sit on a coarse grid so consecutive maneuvers of one
    vehicle never overlap and their inspection windows stay disjoint.
    """
    rng = np.random.default_rng(seed)
    site = equal_lane_site(lane_count)
    slot_step = change_duration_s + 9.0
    slots = np.arange(5.0, duration_s - change_duration_s - 2.0, slot_step)

    vehicles = []
    for vid in range(1, n_vehicles + 1):
        lane = int(rng.integers(1, lane_count + 1))
        n_changes = int(rng.integers(0, max_changes + 1)) if len(slots) else 0
        starts = sorted(rng.choice(len(slots), size=min(n_changes, len(slots)),
                                   replace=False))
        changes = []
        current = lane
        for si in starts:
            options = []
            if current < lane_count:
                options.append(Maneuver.LEFT)
            if current > 1:
                options.append(Maneuver.RIGHT)
            direction = options[int(rng.integers(0, len(options)))]
            start_s = float(slots[si]) + float(rng.uniform(0.0, 3.0))
            changes.append(LaneChangeScript(start_s, direction, change_duration_s))
            current += 1 if direction == Maneuver.LEFT else -1
        # Short speed-adjustment pulses keep the acceleration feature live
        # while bounding the drift to ~2.5 m/s per pulse.
        accel_phases: list[tuple[float, float]] = []
        if duration_s > 12.0:
            for _ in range(int(rng.integers(0, 3))):
                t_a = float(rng.uniform(2.0, duration_s - 8.0))
                a = float(rng.choice([-0.5, 0.5]))
                accel_phases += [(t_a, a), (t_a + 5.0, 0.0)]
        vehicles.append(
            VehicleScript(
                vehicle_id=vid,
                lane=lane,
                speed=float(rng.uniform(20.0, 30.0)),
                y0=float(rng.uniform(0.0, 120.0)),
                accel_phases=tuple(sorted(accel_phases)),
                changes=tuple(changes),
            )
        )
    return ScenarioSpec(
        seed=seed,
        duration_s=duration_s,
        site=site,
        vehicles=tuple(vehicles),
        frame_rate=frame_rate,
        jitter_amplitude=jitter_amplitude,
    )


def corpus_specs(seed: int, n_scenarios: int, **kwargs) -> list[ScenarioSpec]:
    """A family of independent random scenarios with derived seeds."""
    return [random_scenario(seed * 100003 + i, **kwargs) for i in range(n_scenarios)]
