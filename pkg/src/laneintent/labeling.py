"""Maneuver labeling: cross points, heading windows, step labels, segments.

A lane change is anchored at the frame where the vehicle's lateral centroid
crosses a lane boundary. The maneuver window around that anchor is the
maximal contiguous stretch, inside +/- ``delta_t`` seconds, where the smoothed
heading magnitude stays at or above ``theta_bound``. Frames inside a window
inherit the change direction; everything else is lane following.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Mapping, Sequence as TypingSequence, Union

import numpy as np

from .ingest import Sequence


class Maneuver(IntEnum):
    """Class order is fixed; ties in argmax resolve toward the lower value."""

    LEFT = 0
    FOLLOW = 1
    RIGHT = 2

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, text: str) -> "Maneuver":
        return cls[text.strip().upper()]


@dataclass(frozen=True)
class LabelingConfig:
    delta_t: float = 2.0  # seconds inspected on each side of the cross point
    theta_bound: float = 2.0  # degrees
    heading_smooth_window: float = 0.5  # seconds
    n: int = 9  # segment length in steps

    def __post_init__(self) -> None:
        if min(self.delta_t, self.theta_bound, self.heading_smooth_window) < 0:
            raise ValueError("labeling parameters must be non-negative")
        if self.n < 2:
            raise ValueError("segment length n must be at least 2")


@dataclass(frozen=True)
class CrossPoint:
    vehicle_id: int
    frame: int
    direction: Maneuver  # LEFT or RIGHT
    boundary: float  # lateral position of the crossed boundary


@dataclass(frozen=True)
class LaneChangeEvent:
    vehicle_id: int
    cross_frame: int
    start_frame: int
    end_frame: int
    direction: Maneuver
    low_confidence: bool = False

    def __post_init__(self) -> None:
        if not self.start_frame <= self.cross_frame <= self.end_frame:
            raise ValueError(
                f"event frames out of order: start {self.start_frame}, "
                f"cross {self.cross_frame}, end {self.end_frame}"
            )

    def covers(self, frame: int) -> bool:
        return self.start_frame <= frame <= self.end_frame


@dataclass(frozen=True)
class StepLabel:
    vehicle_id: int
    frame: int
    label: Maneuver


@dataclass(frozen=True)
class Segment:
    vehicle_id: int
    frames: tuple[int, ...]
    features: np.ndarray  # (n, feature_dim)
    label: Maneuver

    @property
    def last_frame(self) -> int:
        return self.frames[-1]


class BalanceError(ValueError):
    """A maneuver class has no segments to draw from."""


def find_cross_points(seq: Sequence) -> list[CrossPoint]:
    """Frames where a vehicle's lateral centroid lands on the other side of a
    lane boundary than it was one frame earlier.

    Crossing toward higher ``local_x`` (higher lane index) is a Left change.
    """
    boundaries = seq.site.lane_boundaries[1:-1]  # interior boundaries only
    points: list[CrossPoint] = []
    for vid in seq.vehicle_ids():
        traj = seq.trajectory(vid)
        for prev, cur in zip(traj, traj[1:]):
            if cur.frame != prev.frame + 1:
                continue  # never compare across a trajectory gap
            for b in boundaries:
                was_left = prev.local_x >= b
                is_left = cur.local_x >= b
                if was_left == is_left:
                    continue
                direction = Maneuver.LEFT if cur.local_x > prev.local_x else Maneuver.RIGHT
                points.append(CrossPoint(vid, cur.frame, direction, b))
    return points


def heading_series(
    seq: Sequence, vehicle_id: int, smooth_window_s: float = 0.5
) -> np.ndarray:
    """Per-frame heading in degrees, aligned with ``seq.trajectory(vehicle_id)``.

    Heading is atan2(lateral delta, longitudinal delta) from centered
    differences (one-sided at run endpoints), then moving-average smoothed
    over ``smooth_window_s``. Computed independently per contiguous run so
    differences never span a gap. Zero motion gives heading 0.
    """
    traj = seq.trajectory(vehicle_id)
    if len(traj) < 3:
        raise ValueError(f"vehicle {vehicle_id} trajectory shorter than 3 frames")
    frames = np.array([s.frame for s in traj])
    xs = np.array([s.local_x for s in traj])
    ys = np.array([s.local_y for s in traj])

    theta = np.zeros(len(traj))
    half = int(round(smooth_window_s * seq.frame_rate)) // 2
    run_starts = np.flatnonzero(np.diff(frames) != 1) + 1
    for lo, hi in zip(np.r_[0, run_starts], np.r_[run_starts, len(traj)]):
        theta[lo:hi] = _run_heading(xs[lo:hi], ys[lo:hi], half)
    return theta


def _run_heading(xs: np.ndarray, ys: np.ndarray, smooth_half: int) -> np.ndarray:
    m = len(xs)
    if m == 1:
        return np.zeros(1)
    dx = np.empty(m)
    dy = np.empty(m)
    dx[0], dy[0] = xs[1] - xs[0], ys[1] - ys[0]
    dx[-1], dy[-1] = xs[-1] - xs[-2], ys[-1] - ys[-2]
    if m > 2:
        dx[1:-1] = xs[2:] - xs[:-2]
        dy[1:-1] = ys[2:] - ys[:-2]
    raw = np.degrees(np.arctan2(dx, dy))
    if smooth_half <= 0:
        return raw
    smoothed = np.empty(m)
    for i in range(m):
        lo, hi = max(0, i - smooth_half), min(m, i + smooth_half + 1)
        smoothed[i] = raw[lo:hi].mean()
    return smoothed


def heading_table(
    seq: Sequence, cfg: LabelingConfig
) -> dict[int, np.ndarray]:
    """Heading series for every vehicle with at least 3 frames."""
    return {
        vid: heading_series(seq, vid, cfg.heading_smooth_window)
        for vid in seq.vehicle_ids()
        if len(seq.trajectory(vid)) >= 3
    }


def maneuver_window(
    seq: Sequence,
    cross: CrossPoint,
    cfg: LabelingConfig,
    theta: np.ndarray | None = None,
) -> LaneChangeEvent:
    """Bound a lane change around its cross point via the heading threshold.

    Within +/- ``delta_t`` of the cross frame (clamped to the contiguous run
    containing it), the event spans the maximal contiguous stretch of frames
    with ``|theta| >= theta_bound`` that contains the cross frame. If the
    cross frame itself is below threshold the event collapses to that single
    frame and is flagged low-confidence.
    """
    traj = seq.trajectory(cross.vehicle_id)
    frames = [s.frame for s in traj]
    if cross.frame < frames[0] or cross.frame > frames[-1]:
        raise ValueError(
            f"cross frame {cross.frame} outside trajectory of vehicle {cross.vehicle_id}"
        )
    if theta is None:
        theta = heading_series(seq, cross.vehicle_id, cfg.heading_smooth_window)
    idx = frames.index(cross.frame)

    half = int(round(cfg.delta_t * seq.frame_rate))
    run_lo, run_hi = next(
        (lo, hi) for lo, hi in seq.contiguous_runs(cross.vehicle_id)
        if lo <= cross.frame <= hi
    )
    lo_frame = max(cross.frame - half, run_lo)
    hi_frame = max(cross.frame + half, lo_frame)
    hi_frame = min(hi_frame, run_hi)

    if abs(theta[idx]) < cfg.theta_bound:
        return LaneChangeEvent(
            cross.vehicle_id, cross.frame, cross.frame, cross.frame,
            cross.direction, low_confidence=True,
        )

    start = cross.frame
    while start - 1 >= lo_frame and abs(theta[frames.index(start - 1)]) >= cfg.theta_bound:
        start -= 1
    end = cross.frame
    while end + 1 <= hi_frame and abs(theta[frames.index(end + 1)]) >= cfg.theta_bound:
        end += 1
    return LaneChangeEvent(cross.vehicle_id, cross.frame, start, end, cross.direction)


def detect_events(
    seq: Sequence, cfg: LabelingConfig
) -> tuple[list[LaneChangeEvent], list[CrossPoint]]:
    """Find cross points and bound each into a maneuver window."""
    headings = heading_table(seq, cfg)
    crosses = find_cross_points(seq)
    events = []
    for cross in crosses:
        if cross.vehicle_id not in headings:
            continue  # trajectory too short for a heading estimate
        events.append(maneuver_window(seq, cross, cfg, headings[cross.vehicle_id]))
    return events, crosses


def label_steps(seq: Sequence, events: list[LaneChangeEvent]) -> list[StepLabel]:
    """One label per (vehicle, frame): the covering event's direction, else Follow.

    A frame covered by several events takes the one with the nearest cross
    frame; ties go to the earlier cross frame, so labeling is deterministic.
    """
    by_vehicle: dict[int, list[LaneChangeEvent]] = {}
    for ev in events:
        by_vehicle.setdefault(ev.vehicle_id, []).append(ev)

    labels: list[StepLabel] = []
    for vid in seq.vehicle_ids():
        vehicle_events = by_vehicle.get(vid, [])
        for st in seq.trajectory(vid):
            covering = [ev for ev in vehicle_events if ev.covers(st.frame)]
            if covering:
                best = min(covering, key=lambda ev: (abs(st.frame - ev.cross_frame), ev.cross_frame))
                labels.append(StepLabel(vid, st.frame, best.direction))
            else:
                labels.append(StepLabel(vid, st.frame, Maneuver.FOLLOW))
    return labels


def package_segments(
    labels: TypingSequence[StepLabel],
    features: Mapping[tuple[int, int], np.ndarray],
    n: int,
) -> list[Segment]:
    """Slide a length-``n`` stride-1 window over each vehicle's labeled frames.

    The segment label is the label of the window's last step. Windows whose
    frames are not consecutive (trajectory gaps) are dropped; vehicles with
    fewer than ``n`` frames produce no segments.
    """
    if n < 2:
        raise ValueError("segment length n must be at least 2")
    by_vehicle: dict[int, list[StepLabel]] = {}
    for sl in labels:
        by_vehicle.setdefault(sl.vehicle_id, []).append(sl)

    segments: list[Segment] = []
    for vid in sorted(by_vehicle):
        steps = sorted(by_vehicle[vid], key=lambda sl: sl.frame)
        for i in range(len(steps) - n + 1):
            window = steps[i : i + n]
            frames = tuple(sl.frame for sl in window)
            if frames[-1] - frames[0] != n - 1:
                continue  # window straddles a gap
            mat = np.stack([np.asarray(features[(vid, fr)], dtype=np.float64) for fr in frames])
            segments.append(Segment(vid, frames, mat, window[-1].label))
    return segments


def balance_classes(segments: TypingSequence[Segment], rng_seed: int) -> list[Segment]:
    """Undersample to the smallest class pool and shuffle, deterministically.

    Draws ``N = min pool size`` segments uniformly without replacement from
    each of the three pools; raises :class:`BalanceError` naming the class if
    any pool is empty.
    """
    pools: dict[Maneuver, list[Segment]] = {m: [] for m in Maneuver}
    for seg in segments:
        pools[seg.label].append(seg)
    for maneuver, pool in pools.items():
        if not pool:
            raise BalanceError(f"no segments for class {maneuver.label}")
    n_draw = min(len(pool) for pool in pools.values())
    rng = np.random.default_rng(rng_seed)
    chosen: list[Segment] = []
    for maneuver in Maneuver:  # fixed class order keeps draws reproducible
        pool = pools[maneuver]
        idx = rng.choice(len(pool), size=n_draw, replace=False)
        chosen.extend(pool[i] for i in idx)
    order = rng.permutation(len(chosen))
    return [chosen[i] for i in order]


def write_event_table(events: TypingSequence[LaneChangeEvent], path: Union[str, Path]) -> None:
    """Audit CSV of detected maneuver windows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["vehicle_id", "cross_frame", "start_frame", "end_frame", "direction", "low_confidence"]
        )
        for ev in sorted(events, key=lambda e: (e.vehicle_id, e.cross_frame)):
            writer.writerow(
                [ev.vehicle_id, ev.cross_frame, ev.start_frame, ev.end_frame,
                 ev.direction.label, int(ev.low_confidence)]
            )


def write_label_table(labels: TypingSequence[StepLabel], path: Union[str, Path]) -> None:
    """Audit CSV of per-step labels."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["vehicle_id", "frame", "label"])
        for sl in sorted(labels, key=lambda s: (s.vehicle_id, s.frame)):
            writer.writerow([sl.vehicle_id, sl.frame, sl.label.label])


def read_label_table(path: Union[str, Path]) -> list[StepLabel]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return [
            StepLabel(int(row["vehicle_id"]), int(row["frame"]), Maneuver.from_label(row["label"]))
            for row in reader
        ]
