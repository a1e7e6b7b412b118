"""Trajectory-table ingestion: typed vehicle states, site geometry, and neighbor lookup.

Lateral convention used throughout the package: ``local_x`` increases toward
the site's *left*, lane boundaries are strictly increasing, and lane ``k``
spans ``[boundary[k-1], boundary[k])``. Consequently lane 1 is the rightmost
lane, lane ``lane_count`` the leftmost, the left neighbor lane of lane ``k``
is ``k + 1``, and positive lateral motion means drifting left. Reports emit
this convention so runs stay comparable.
"""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Union

logger = logging.getLogger(__name__)

FOOT_IN_METERS = 0.3048

# Gap assigned to absent neighbor slots; keeps features bounded and monotone
# in "emptier is safer". Present-neighbor gaps are clamped to the same cap.
DEFAULT_GAP_CAP = 100.0

REQUIRED_COLUMNS = (
    "Vehicle_ID",
    "Frame_ID",
    "Local_X",
    "Local_Y",
    "v_Vel",
    "v_Acc",
    "Lane_ID",
    "v_Length",
    "v_Width",
)


class SchemaError(ValueError):
    """Input table does not have the required columns."""


class DataError(ValueError):
    """Input rows violate a trajectory invariant (named in the message)."""


class VehicleLookupError(KeyError):
    """Requested (vehicle, frame) pair is not present in the sequence."""


@dataclass(frozen=True)
class VehicleState:
    """One vehicle at one frame, SI units throughout."""

    vehicle_id: int
    frame: int
    local_x: float  # lateral position, meters, increasing leftward
    local_y: float  # longitudinal position, meters
    lane_id: int  # 1-based, lane 1 rightmost
    velocity: float  # m/s
    acceleration: float  # m/s^2
    length: float = 4.5
    width: float = 1.8


@dataclass(frozen=True)
class SiteGeometry:
    """Lane layout of a site: ``lane_count + 1`` strictly increasing boundaries."""

    lane_boundaries: tuple[float, ...]
    site_name: str = "unnamed"

    def __post_init__(self) -> None:
        if len(self.lane_boundaries) < 2:
            raise ValueError("need at least two lane boundaries")
        bounds = tuple(float(b) for b in self.lane_boundaries)
        if any(b1 <= b0 for b0, b1 in zip(bounds, bounds[1:])):
            raise ValueError(f"lane boundaries must be strictly increasing: {bounds}")
        object.__setattr__(self, "lane_boundaries", bounds)

    @property
    def lane_count(self) -> int:
        return len(self.lane_boundaries) - 1

    def lane_center(self, lane_id: int) -> float:
        self._check_lane(lane_id)
        return 0.5 * (self.lane_boundaries[lane_id - 1] + self.lane_boundaries[lane_id])

    def lane_width(self, lane_id: int) -> float:
        self._check_lane(lane_id)
        return self.lane_boundaries[lane_id] - self.lane_boundaries[lane_id - 1]

    def lane_of(self, local_x: float) -> int:
        """Lane whose span contains ``local_x``; clamps to the outermost lanes."""
        if local_x < self.lane_boundaries[0]:
            return 1
        for k in range(1, self.lane_count + 1):
            if local_x < self.lane_boundaries[k]:
                return k
        return self.lane_count

    def boundary_between(self, lane_a: int, lane_b: int) -> float:
        """Dividing boundary of two adjacent lanes."""
        self._check_lane(lane_a)
        self._check_lane(lane_b)
        if abs(lane_a - lane_b) != 1:
            raise ValueError(f"lanes {lane_a} and {lane_b} are not adjacent")
        return self.lane_boundaries[min(lane_a, lane_b)]

    def _check_lane(self, lane_id: int) -> None:
        if not 1 <= lane_id <= self.lane_count:
            raise ValueError(f"lane_id {lane_id} outside [1, {self.lane_count}]")

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "SiteGeometry":
        """Read a key-value geometry file (``site_name`` and ``lane_boundaries``)."""
        values: dict[str, str] = {}
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SchemaError(f"geometry line is not key = value: {line!r}")
            key, _, val = line.partition("=")
            values[key.strip()] = val.strip()
        if "lane_boundaries" not in values:
            raise SchemaError("geometry file missing 'lane_boundaries'")
        bounds = tuple(float(tok) for tok in values["lane_boundaries"].replace(",", " ").split())
        return cls(lane_boundaries=bounds, site_name=values.get("site_name", "unnamed"))

    def to_file(self, path: Union[str, Path]) -> None:
        text = (
            f"site_name = {self.site_name}\n"
            f"lane_boundaries = {', '.join(repr(b) for b in self.lane_boundaries)}\n"
        )
        Path(path).write_text(text)


class Sequence:
    """Immutable frame-indexed collection of per-vehicle trajectories.

    Per-vehicle frames must be strictly increasing; gaps split a trajectory
    into contiguous runs that downstream windows never straddle. Lookup maps
    are built once so per-(vehicle, frame) access is O(1).
    """

    def __init__(
        self,
        site: SiteGeometry,
        states: Iterable[VehicleState],
        frame_rate: float = 10.0,
        start_frame: int | None = None,
        end_frame: int | None = None,
    ) -> None:
        self.site = site
        self.frame_rate = float(frame_rate)
        by_vehicle: dict[int, list[VehicleState]] = {}
        for st in states:
            by_vehicle.setdefault(st.vehicle_id, []).append(st)

        self._by_vehicle: dict[int, list[VehicleState]] = {}
        self._state_index: dict[tuple[int, int], VehicleState] = {}
        self._by_frame: dict[int, list[VehicleState]] = {}
        for vid in sorted(by_vehicle):
            traj = sorted(by_vehicle[vid], key=lambda s: s.frame)
            for a, b in zip(traj, traj[1:]):
                if b.frame <= a.frame:
                    raise DataError(f"vehicle {vid} has non-increasing frames at frame {b.frame}")
            self._by_vehicle[vid] = traj
            for st in traj:
                self._state_index[(vid, st.frame)] = st
                self._by_frame.setdefault(st.frame, []).append(st)

        frames = sorted(self._by_frame)
        if start_frame is None:
            start_frame = frames[0] if frames else 0
        if end_frame is None:
            end_frame = frames[-1] if frames else start_frame - 1
        self.start_frame = int(start_frame)
        self.end_frame = int(end_frame)
        for fr in frames:
            if not self.start_frame <= fr <= self.end_frame:
                raise DataError(
                    f"frame {fr} outside sequence span [{self.start_frame}, {self.end_frame}]"
                )
        self.y_origin = min((s.local_y for s in self._state_index.values()), default=0.0)

    @property
    def n_frames(self) -> int:
        return max(self.end_frame - self.start_frame + 1, 0)

    def vehicle_ids(self) -> list[int]:
        return list(self._by_vehicle)

    def trajectory(self, vehicle_id: int) -> list[VehicleState]:
        if vehicle_id not in self._by_vehicle:
            raise VehicleLookupError(f"vehicle {vehicle_id} not in sequence")
        return self._by_vehicle[vehicle_id]

    def state_at(self, vehicle_id: int, frame: int) -> VehicleState:
        try:
            return self._state_index[(vehicle_id, frame)]
        except KeyError:
            raise VehicleLookupError(
                f"vehicle {vehicle_id} absent at frame {frame}"
            ) from None

    def has_state(self, vehicle_id: int, frame: int) -> bool:
        return (vehicle_id, frame) in self._state_index

    def states_at(self, frame: int) -> list[VehicleState]:
        return self._by_frame.get(frame, [])

    def all_states(self) -> list[VehicleState]:
        return [st for traj in self._by_vehicle.values() for st in traj]

    def contiguous_runs(self, vehicle_id: int) -> list[tuple[int, int]]:
        """Inclusive (first, last) frame spans of gap-free stretches."""
        traj = self.trajectory(vehicle_id)
        runs: list[tuple[int, int]] = []
        lo = traj[0].frame
        prev = lo
        for st in traj[1:]:
            if st.frame != prev + 1:
                runs.append((lo, prev))
                lo = st.frame
            prev = st.frame
        runs.append((lo, prev))
        return runs


def _open_text(source: Union[str, Path, bytes, io.IOBase]) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", encoding="utf-8")
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, io.TextIOBase):
        return source
    return io.TextIOWrapper(source, encoding="utf-8")


def parse_trajectory_table(
    source: Union[str, Path, bytes, io.IOBase],
    site: SiteGeometry,
    unit: str = "feet",
    frame_rate: float = 10.0,
) -> Sequence:
    """Parse a delimiter-separated trajectory table into a :class:`Sequence`.

    The header must contain at least ``REQUIRED_COLUMNS`` (extra columns are
    ignored). ``unit="feet"`` converts every length-like field to SI with the
    fixed 0.3048 factor; ``unit="meters"`` passes values through. Malformed
    rows are rejected and logged with their 1-based file line number.
    """
    if unit not in ("feet", "meters"):
        raise ValueError(f"unit must be 'feet' or 'meters', got {unit!r}")
    scale = FOOT_IN_METERS if unit == "feet" else 1.0

    fh = _open_text(source)
    header_line = fh.readline()
    if not header_line.strip():
        raise SchemaError("empty input: no header row")
    delim = "," if "," in header_line else None  # None = any whitespace
    header = [tok.strip() for tok in header_line.split(delim)]
    missing = [col for col in REQUIRED_COLUMNS if col not in header]
    if missing:
        raise SchemaError(f"missing required columns: {', '.join(missing)}")
    col = {name: header.index(name) for name in REQUIRED_COLUMNS}

    states: list[VehicleState] = []
    rejected: list[int] = []
    for lineno, line in enumerate(fh, start=2):
        if not line.strip():
            continue
        tokens = [tok.strip() for tok in line.split(delim)]
        try:
            vehicle_id = int(float(tokens[col["Vehicle_ID"]]))
            frame = int(float(tokens[col["Frame_ID"]]))
            lane_id = int(float(tokens[col["Lane_ID"]]))
            local_x = float(tokens[col["Local_X"]]) * scale
            local_y = float(tokens[col["Local_Y"]]) * scale
            velocity = float(tokens[col["v_Vel"]]) * scale
            acceleration = float(tokens[col["v_Acc"]]) * scale
            length = float(tokens[col["v_Length"]]) * scale
            width = float(tokens[col["v_Width"]]) * scale
        except (ValueError, IndexError):
            rejected.append(lineno)
            continue
        if not 1 <= lane_id <= site.lane_count:
            raise DataError(
                f"row {lineno}: vehicle {vehicle_id} has lane_id {lane_id} "
                f"outside [1, {site.lane_count}]"
            )
        if velocity < 0:
            raise DataError(f"row {lineno}: vehicle {vehicle_id} has negative velocity")
        states.append(
            VehicleState(
                vehicle_id=vehicle_id,
                frame=frame,
                local_x=local_x,
                local_y=local_y,
                lane_id=lane_id,
                velocity=velocity,
                acceleration=acceleration,
                length=length,
                width=width,
            )
        )
    if rejected:
        logger.warning("rejected %d malformed rows at lines %s", len(rejected), rejected)
    return Sequence(site, states, frame_rate=frame_rate)


def split_sequence(
    seq: Sequence, test_minutes: float, frame_rate: float | None = None
) -> tuple[Sequence, Sequence]:
    """Split off the first ``test_minutes`` of frames as the test sequence.

    Returns ``(train, test)``; the split partitions frames, so no frame
    appears on both sides.
    """
    rate = seq.frame_rate if frame_rate is None else float(frame_rate)
    n_test = int(round(test_minutes * 60.0 * rate))
    if n_test < 0:
        raise ValueError("test_minutes must be non-negative")
    if n_test > seq.n_frames:
        raise ValueError(
            f"test window of {n_test} frames exceeds sequence length {seq.n_frames}"
        )
    cut = seq.start_frame + n_test  # first train frame
    test_states = [s for s in seq.all_states() if s.frame < cut]
    train_states = [s for s in seq.all_states() if s.frame >= cut]
    test = Sequence(
        seq.site, test_states, seq.frame_rate, start_frame=seq.start_frame, end_frame=cut - 1
    )
    train = Sequence(
        seq.site, train_states, seq.frame_rate, start_frame=cut, end_frame=seq.end_frame
    )
    return train, test


@dataclass(frozen=True)
class NeighborSlot:
    """One surrounding-vehicle slot; absent slots carry the gap cap and the
    ego speed (so speed differences collapse to zero)."""

    present: bool
    vehicle_id: int | None
    speed: float
    gap: float


@dataclass(frozen=True)
class NeighborContext:
    """Slot assignment of the vehicles around an ego state.

    ``p``/``f`` are the same-lane preceding and rear vehicles, ``pl``/``pr``
    and ``fl``/``fr`` the ahead/behind vehicles in the left and right lanes,
    and ``asl``/``asr`` the nearest vehicles alongside (longitudinal span
    overlapping ego's). Gaps are bumper-to-bumper, floored at 0 and clamped
    to ``gap_cap``.
    """

    ego: VehicleState
    p: NeighborSlot
    f: NeighborSlot
    pl: NeighborSlot
    pr: NeighborSlot
    fl: NeighborSlot
    fr: NeighborSlot
    asl: NeighborSlot
    asr: NeighborSlot
    left_lane_exists: bool
    right_lane_exists: bool
    gap_cap: float = DEFAULT_GAP_CAP

    slot_names = ("p", "f", "pl", "pr", "fl", "fr", "asl", "asr")


def bumper_gap(a: VehicleState, b: VehicleState) -> float:
    """Bumper-to-bumper longitudinal gap between two states, floored at 0."""
    return max(abs(a.local_y - b.local_y) - 0.5 * (a.length + b.length), 0.0)


def _absent(ego: VehicleState, cap: float) -> NeighborSlot:
    return NeighborSlot(present=False, vehicle_id=None, speed=ego.velocity, gap=cap)


def _fill(ego: VehicleState, other: VehicleState | None, cap: float) -> NeighborSlot:
    if other is None:
        return _absent(ego, cap)
    return NeighborSlot(
        present=True,
        vehicle_id=other.vehicle_id,
        speed=other.velocity,
        gap=min(bumper_gap(ego, other), cap),
    )


def _nearest(candidates: list[VehicleState], ego_y: float) -> VehicleState | None:
    if not candidates:
        return None
    return min(candidates, key=lambda s: (abs(s.local_y - ego_y), s.vehicle_id))


def neighbors_at(
    seq: Sequence, vehicle_id: int, frame: int, gap_cap: float = DEFAULT_GAP_CAP
) -> NeighborContext:
    """Assign the surrounding vehicles at ``frame`` to their slots.

    Ahead/behind is decided by longitudinal center position (strictly
    greater/smaller than ego's); alongside means the longitudinal spans
    overlap. Each slot independently takes the nearest qualifying vehicle.
    """
    ego = seq.state_at(vehicle_id, frame)
    others = [s for s in seq.states_at(frame) if s.vehicle_id != vehicle_id]

    left_lane = ego.lane_id + 1 if ego.lane_id < seq.site.lane_count else None
    right_lane = ego.lane_id - 1 if ego.lane_id > 1 else None

    def in_lane(lane: int | None) -> list[VehicleState]:
        return [] if lane is None else [s for s in others if s.lane_id == lane]

    def ahead(pool: list[VehicleState]) -> VehicleState | None:
        return _nearest([s for s in pool if s.local_y > ego.local_y], ego.local_y)

    def behind(pool: list[VehicleState]) -> VehicleState | None:
        return _nearest([s for s in pool if s.local_y < ego.local_y], ego.local_y)

    def alongside(pool: list[VehicleState]) -> VehicleState | None:
        lo, hi = ego.local_y - 0.5 * ego.length, ego.local_y + 0.5 * ego.length
        overlapping = [
            s
            for s in pool
            if s.local_y - 0.5 * s.length < hi and s.local_y + 0.5 * s.length > lo
        ]
        return _nearest(overlapping, ego.local_y)

    same = in_lane(ego.lane_id)
    left = in_lane(left_lane)
    right = in_lane(right_lane)

    return NeighborContext(
        ego=ego,
        p=_fill(ego, ahead(same), gap_cap),
        f=_fill(ego, behind(same), gap_cap),
        pl=_fill(ego, ahead(left), gap_cap),
        pr=_fill(ego, ahead(right), gap_cap),
        fl=_fill(ego, behind(left), gap_cap),
        fr=_fill(ego, behind(right), gap_cap),
        asl=_fill(ego, alongside(left), gap_cap),
        asr=_fill(ego, alongside(right), gap_cap),
        left_lane_exists=left_lane is not None,
        right_lane_exists=right_lane is not None,
        gap_cap=gap_cap,
    )


LATERAL_CONVENTION = (
    "+local_x points left; lane 1 is the rightmost lane; "
    "crossing toward a higher lane index is a Left change"
)
