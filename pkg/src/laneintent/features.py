"""Per-step feature vectors: ego kinematics, neighbor gaps, traffic factors.

The default vector has 12 components in a fixed, documented order: four ego
values (acceleration, heading, lateral offset from own-lane center,
longitudinal position relative to the sequence origin) and eight neighbor
values (two lane-presence flags, six bumper gaps). The augmented mode
appends the ten raw traffic-factor inputs (incentive, safety, tolerance
groups), letting the classifier learn those factor functions itself.
"""

from __future__ import annotations

import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence as TypingSequence, Union

import numpy as np

from .ingest import DEFAULT_GAP_CAP, NeighborContext, Sequence, neighbors_at
from .labeling import LabelingConfig, Maneuver, Segment, heading_table

logger = logging.getLogger(__name__)

FEATURE_NAMES = (
    "ego_acceleration",
    "ego_heading_deg",
    "ego_lateral_offset",
    "ego_longitudinal_pos",
    "left_lane_presence",
    "right_lane_presence",
    "gap_preceding_left",
    "gap_preceding",
    "gap_preceding_right",
    "gap_following_left",
    "gap_following",
    "gap_following_right",
)

TRAFFIC_FACTOR_NAMES = (
    "dv_ego_vs_preceding",
    "dv_left_preceding_vs_preceding",
    "dv_right_preceding_vs_preceding",
    "dgap_left_preceding_vs_preceding",
    "dgap_right_preceding_vs_preceding",
    "gap_following_left",
    "gap_following_right",
    "dv_ego_vs_following_left",
    "dv_ego_vs_following_right",
    "headway_margin",
)

AUGMENTED_FEATURE_NAMES = FEATURE_NAMES + TRAFFIC_FACTOR_NAMES

# Presence flags stay unscaled during normalization.
FLAG_INDICES = (4, 5)

DEFAULT_HEADWAY_S = 1.5


@dataclass(frozen=True)
class FeatureConfig:
    augmented: bool = False
    headway_s: float = DEFAULT_HEADWAY_S  # safe-headway constant for the tolerance input
    gap_cap: float = DEFAULT_GAP_CAP

    @property
    def dim(self) -> int:
        return len(AUGMENTED_FEATURE_NAMES) if self.augmented else len(FEATURE_NAMES)

    @property
    def names(self) -> tuple[str, ...]:
        return AUGMENTED_FEATURE_NAMES if self.augmented else FEATURE_NAMES


def ego_features(seq: Sequence, vehicle_id: int, frame: int, heading_deg: float) -> np.ndarray:
    """[acceleration, heading, lateral offset from lane center, longitudinal position]."""
    st = seq.state_at(vehicle_id, frame)
    offset = st.local_x - seq.site.lane_center(st.lane_id)
    return np.array([st.acceleration, heading_deg, offset, st.local_y - seq.y_origin])


def neighbor_features(ctx: NeighborContext) -> np.ndarray:
    """[presence_L, presence_R, gap PL, P, PR, FL, F, FR]; absent slots carry the cap."""
    return np.array(
        [
            float(ctx.left_lane_exists),
            float(ctx.right_lane_exists),
            ctx.pl.gap,
            ctx.p.gap,
            ctx.pr.gap,
            ctx.fl.gap,
            ctx.f.gap,
            ctx.fr.gap,
        ]
    )


@dataclass(frozen=True)
class TrafficFactorInputs:
    """Raw scalar inputs of the incentive/safety/tolerance factor groups."""

    incentive: np.ndarray  # (5,)
    safety: np.ndarray  # (4,)
    tolerance: np.ndarray  # (1,)
    headway_s: float

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.incentive, self.safety, self.tolerance])


def traffic_factor_inputs(ctx: NeighborContext, headway_s: float = DEFAULT_HEADWAY_S) -> TrafficFactorInputs:
    """Speed-gain, rear-gap risk, and headway-comfort inputs for one step.

    Absent neighbors contribute zero speed difference (their slot speed is
    the ego speed) and the gap cap for distances.
    """
    if headway_s <= 0:
        raise ValueError("headway_s must be positive")
    v_e = ctx.ego.velocity
    incentive = np.array(
        [
            v_e - ctx.p.speed,
            ctx.pl.speed - ctx.p.speed,
            ctx.pr.speed - ctx.p.speed,
            ctx.pl.gap - ctx.p.gap,
            ctx.pr.gap - ctx.p.gap,
        ]
    )
    safety = np.array(
        [
            ctx.fl.gap,
            ctx.fr.gap,
            v_e - ctx.fl.speed,
            v_e - ctx.fr.speed,
        ]
    )
    tolerance = np.array([ctx.p.gap - v_e * headway_s])
    return TrafficFactorInputs(incentive, safety, tolerance, headway_s)


def step_features(
    seq: Sequence,
    vehicle_id: int,
    frame: int,
    heading_deg: float,
    cfg: FeatureConfig = FeatureConfig(),
) -> np.ndarray:
    """Full feature vector for one (vehicle, frame)."""
    ctx = neighbors_at(seq, vehicle_id, frame, gap_cap=cfg.gap_cap)
    parts = [ego_features(seq, vehicle_id, frame, heading_deg), neighbor_features(ctx)]
    if cfg.augmented:
        parts.append(traffic_factor_inputs(ctx, cfg.headway_s).as_vector())
    return np.concatenate(parts)


def compute_feature_table(
    seq: Sequence,
    labeling_cfg: LabelingConfig = LabelingConfig(),
    cfg: FeatureConfig = FeatureConfig(),
) -> dict[tuple[int, int], np.ndarray]:
    """Feature vectors for every (vehicle, frame) with a heading estimate.

    Vehicles shorter than three frames have no heading series and are
    skipped; callers packaging segments should restrict labels accordingly.
    """
    headings = heading_table(seq, labeling_cfg)
    table: dict[tuple[int, int], np.ndarray] = {}
    for vid, theta in headings.items():
        for st, heading in zip(seq.trajectory(vid), theta):
            table[(vid, st.frame)] = step_features(seq, vid, st.frame, float(heading), cfg)
    return table


# --- normalization ----------------------------------------------------------

@dataclass(frozen=True)
class NormalizationStats:
    mean: np.ndarray
    std: np.ndarray
    flag_indices: tuple[int, ...] = FLAG_INDICES

    def to_dict(self) -> dict:
        return {
            "mean": self.mean.tolist(),
            "std": self.std.tolist(),
            "flag_indices": list(self.flag_indices),
        }

    @classmethod
    def from_dict(cls, doc: Mapping) -> "NormalizationStats":
        return cls(
            mean=np.asarray(doc["mean"], dtype=np.float64),
            std=np.asarray(doc["std"], dtype=np.float64),
            flag_indices=tuple(doc["flag_indices"]),
        )


def fit_normalization(segments: TypingSequence[Segment]) -> NormalizationStats:
    """Per-dimension z-score statistics over all steps of the training segments.

    Presence flags are exempt (identity scaling); constant dimensions get
    standard deviation 1 and a warning so downstream scaling stays finite.
    """
    if not segments:
        raise ValueError("cannot fit normalization on an empty training set")
    rows = np.concatenate([seg.features for seg in segments], axis=0)
    mean = rows.mean(axis=0)
    std = rows.std(axis=0)
    constant = std < 1e-12
    if np.any(constant):
        names = AUGMENTED_FEATURE_NAMES if rows.shape[1] == len(AUGMENTED_FEATURE_NAMES) else FEATURE_NAMES
        for i in np.flatnonzero(constant):
            label = names[i] if i < len(names) else f"dim_{i}"
            logger.warning("feature %s is constant on the training set; std forced to 1", label)
    std = np.where(constant, 1.0, std)
    flags = [i for i in FLAG_INDICES if i < rows.shape[1]]
    mean[flags] = 0.0
    std[flags] = 1.0
    return NormalizationStats(mean=mean, std=std, flag_indices=tuple(flags))


def apply_normalization(x: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    return (np.asarray(x, dtype=np.float64) - stats.mean) / stats.std


def invert_normalization(x: np.ndarray, stats: NormalizationStats) -> np.ndarray:
    return np.asarray(x, dtype=np.float64) * stats.std + stats.mean


# --- binary container --------------------------------------------------------

MAGIC = b"LIFT"  # lane-intent feature tensor
CONTAINER_VERSION = 1


class ContainerError(ValueError):
    """Corrupt or incompatible feature container."""


def save_array(path: Union[str, Path], array: np.ndarray) -> None:
    """Write magic, version, rank, dims, then row-major float64 data."""
    arr = np.ascontiguousarray(array, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", CONTAINER_VERSION))
        fh.write(struct.pack("<I", arr.ndim))
        fh.write(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        fh.write(arr.tobytes())


def load_array(path: Union[str, Path]) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ContainerError(f"bad magic {magic!r} in {path}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CONTAINER_VERSION:
            raise ContainerError(f"unsupported container version {version}")
        (rank,) = struct.unpack("<I", fh.read(4))
        if not 1 <= rank <= 8:
            raise ContainerError(f"implausible rank {rank}")
        shape = struct.unpack(f"<{rank}Q", fh.read(8 * rank))
        count = int(np.prod(shape))
        data = np.frombuffer(fh.read(8 * count), dtype="<f8", count=count)
        if data.size != count:
            raise ContainerError("file ended before all data was read")
    return data.reshape(shape).copy()


def save_segments(
    path: Union[str, Path],
    segments: TypingSequence[Segment],
    feature_names: TypingSequence[str],
    normalization: NormalizationStats | None = None,
    config_hash: str = "",
) -> None:
    """Persist packaged segments: features in the binary container, labels and
    identity plus normalization stats in the JSON sidecar."""
    if not segments:
        raise ValueError("no segments to save")
    x = np.stack([seg.features for seg in segments])
    save_array(path, x)
    sidecar = {
        "container_version": CONTAINER_VERSION,
        "feature_names": list(feature_names),
        "segment_length": int(x.shape[1]),
        "labels": [seg.label.label for seg in segments],
        "vehicle_ids": [seg.vehicle_id for seg in segments],
        "last_frames": [seg.last_frame for seg in segments],
        "normalization": normalization.to_dict() if normalization else None,
        "config_hash": config_hash,
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def load_segments(path: Union[str, Path]) -> tuple[np.ndarray, np.ndarray, dict]:
    """Load a segment container: (features (S, n, d), labels (S,), sidecar)."""
    x = load_array(path)
    sidecar = json.loads(Path(str(path) + ".json").read_text())
    labels = np.array([Maneuver.from_label(lb) for lb in sidecar["labels"]], dtype=np.int64)
    if x.shape[0] != labels.shape[0]:
        raise ContainerError("label count does not match feature rows")
    return x, labels, sidecar
