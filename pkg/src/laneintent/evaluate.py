"""Evaluation protocol: confusion matrices, prediction-time statistics, and
the history-length sweep.

Published NGSIM benchmark rows are embedded as a reference card for
side-by-side reporting only; they are never pass/fail targets because the
underlying extraction and several hyperparameters are not reproducible here.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence as TypingSequence, Union

import numpy as np

from .labeling import LaneChangeEvent, Maneuver
from .models import Model, classify_batch, segments_to_arrays
from .nn_core import TrainConfig
from .pipeline import LabeledCorpus, LabeledSplit, balanced_test_arrays, train_on_corpus

# Row-normalized percentages (rows: true left/follow/right) reported on the
# NGSIM extraction by the published benchmark; qualitative reference only.
NGSIM_REFERENCE_ACCURACY = {
    "lstm": [
        [87.40, 12.34, 0.26],
        [7.47, 85.33, 7.20],
        [2.94, 11.22, 85.84],
    ],
    "ffnn": [
        [84.6, 15.40, 0.0],
        [2.61, 83.78, 13.61],
        [2.44, 12.91, 79.65],
    ],
    "logreg": [
        [64.91, 35.03, 0.06],
        [9.88, 82.87, 7.25],
        [0.05, 36.30, 63.65],
    ],
}


@dataclass(frozen=True)
class EvalConfig:
    horizon_s: float = 6.0  # matching window between prediction points and crossings
    n_values: tuple[int, ...] = (6, 9, 12)
    kinds: tuple[str, ...] = ("lstm", "ffnn", "logreg")
    sweep_seeds: tuple[int, ...] = (0, 1, 2)


class ConfusionMatrix:
    """3x3 counts, rows = true class, columns = predicted class."""

    def __init__(self, counts: np.ndarray) -> None:
        counts = np.asarray(counts, dtype=np.int64)
        if counts.shape != (3, 3) or np.any(counts < 0):
            raise ValueError(f"not a 3x3 count matrix: {counts}")
        self.counts = counts

    @classmethod
    def from_pairs(cls, y_true: np.ndarray, y_pred: np.ndarray) -> "ConfusionMatrix":
        y_true = np.asarray(y_true, dtype=np.int64)
        y_pred = np.asarray(y_pred, dtype=np.int64)
        if y_true.size == 0:
            raise ValueError("cannot build a confusion matrix from an empty test set")
        counts = np.zeros((3, 3), dtype=np.int64)
        np.add.at(counts, (y_true, y_pred), 1)
        return cls(counts)

    @property
    def normalized(self) -> np.ndarray:
        """Row percentages; rows with no samples stay all-zero."""
        row_sums = self.counts.sum(axis=1, keepdims=True)
        safe = np.where(row_sums == 0, 1, row_sums)
        out = 100.0 * self.counts / safe
        return np.where(row_sums == 0, 0.0, out)

    @property
    def overall_accuracy(self) -> float:
        return float(np.trace(self.counts) / self.counts.sum())

    @property
    def per_class_accuracy(self) -> np.ndarray:
        return self.normalized.diagonal() / 100.0

    def write_csv(self, path: Union[str, Path]) -> None:
        norm = self.normalized
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["true", "pred_left_pct", "pred_follow_pct", "pred_right_pct",
                             "row_count"])
            for i, maneuver in enumerate(Maneuver):
                writer.writerow(
                    [maneuver.label] + [repr(float(v)) for v in norm[i]]
                    + [int(self.counts[i].sum())]
                )

    def to_dict(self) -> dict:
        return {
            "counts": self.counts.tolist(),
            "normalized_pct": self.normalized.tolist(),
            "overall_accuracy": self.overall_accuracy,
        }


def confusion(model: Model, x_raw: np.ndarray, y_true: np.ndarray) -> ConfusionMatrix:
    """Confusion matrix of the model on labeled raw segments."""
    return ConfusionMatrix.from_pairs(y_true, classify_batch(model, x_raw))


# --- prediction points and prediction time -----------------------------------

@dataclass(frozen=True)
class PredictionPoint:
    vehicle_id: int
    frame: int
    direction: Maneuver


def prediction_points(labels: TypingSequence[Maneuver]) -> list[int]:
    """Indices completing the first 3 consecutive identical lane-change
    predictions of each run; Follow never forms a point."""
    points: list[int] = []
    run_label: Maneuver | None = None
    run_len = 0
    for idx, label in enumerate(labels):
        label = Maneuver(label)
        if label == run_label:
            run_len += 1
        else:
            run_label = label
            run_len = 1
        if label != Maneuver.FOLLOW and run_len == 3:
            points.append(idx)
    return points


def timeline_prediction_points(
    timeline: dict[int, list[tuple[int, Maneuver]]]
) -> list[PredictionPoint]:
    """Apply the 3-step rule per vehicle over (frame, label) timelines.

    Runs reset across frame gaps, so three predictions separated by a missing
    frame never form a point.
    """
    points: list[PredictionPoint] = []
    for vid, steps in timeline.items():
        steps = sorted(steps)
        run_label: Maneuver | None = None
        run_len = 0
        prev_frame: int | None = None
        for frame, label in steps:
            label = Maneuver(label)
            contiguous = prev_frame is not None and frame == prev_frame + 1
            if label == run_label and contiguous:
                run_len += 1
            else:
                run_label = label
                run_len = 1
            if label != Maneuver.FOLLOW and run_len == 3:
                points.append(PredictionPoint(vid, frame, label))
            prev_frame = frame
    return points


def classification_timeline(
    model: Model, split: LabeledSplit, n: int
) -> dict[int, list[tuple[int, Maneuver]]]:
    """Per-frame model classifications over a labeled split, one entry per
    packaged window end."""
    segments = split.segments(n)
    if not segments:
        return {}
    x, _, vids, last_frames = segments_to_arrays(segments)
    predicted = classify_batch(model, x)
    timeline: dict[int, list[tuple[int, Maneuver]]] = {}
    for vid, frame, label in zip(vids, last_frames, predicted):
        timeline.setdefault(int(vid), []).append((int(frame), Maneuver(int(label))))
    return timeline


@dataclass
class EventOutcome:
    event: LaneChangeEvent
    status: str  # "predicted" | "late" | "missed"
    time_s: float | None  # positive lead time; negative for late


@dataclass
class PredictionTimeStats:
    outcomes: list[EventOutcome]
    false_alarms: list[PredictionPoint]
    mean_time_s: float
    median_time_s: float
    miss_rate: float

    @property
    def n_events(self) -> int:
        return len(self.outcomes)

    def to_dict(self) -> dict:
        by_status = {s: sum(1 for o in self.outcomes if o.status == s)
                     for s in ("predicted", "late", "missed")}
        return {
            "n_events": self.n_events,
            "by_status": by_status,
            "n_false_alarms": len(self.false_alarms),
            "mean_time_s": self.mean_time_s,
            "median_time_s": self.median_time_s,
            "miss_rate": self.miss_rate,
        }


def prediction_time(
    points: Iterable[PredictionPoint],
    events: Iterable[LaneChangeEvent],
    frame_rate: float,
    horizon_s: float = 6.0,
) -> PredictionTimeStats:
    """Match prediction points to crossings and time each ground-truth event.

    A point is matched to the nearest subsequent cross point of the same
    vehicle and direction within the horizon. Events with an on-time point
    get the lead time from the earliest such point; events whose only points
    came after the crossing (within the horizon) are "late" with negative
    time; untouched events are "missed". Points matching no event at all are
    false alarms.
    """
    horizon = int(round(horizon_s * frame_rate))
    events = list(events)
    on_time: dict[int, list[int]] = {i: [] for i in range(len(events))}
    late: dict[int, list[int]] = {i: [] for i in range(len(events))}
    false_alarms: list[PredictionPoint] = []

    for pt in points:
        same = [
            (i, ev) for i, ev in enumerate(events)
            if ev.vehicle_id == pt.vehicle_id and ev.direction == pt.direction
        ]
        ahead = [(i, ev) for i, ev in same
                 if 0 <= ev.cross_frame - pt.frame <= horizon]
        if ahead:
            i, ev = min(ahead, key=lambda pair: pair[1].cross_frame - pt.frame)
            on_time[i].append(pt.frame)
            continue
        behind = [(i, ev) for i, ev in same
                  if 0 < pt.frame - ev.cross_frame <= horizon]
        if behind:
            i, ev = min(behind, key=lambda pair: pt.frame - pair[1].cross_frame)
            late[i].append(pt.frame)
            continue
        false_alarms.append(pt)

    outcomes: list[EventOutcome] = []
    for i, ev in enumerate(events):
        if on_time[i]:
            lead = (ev.cross_frame - min(on_time[i])) / frame_rate
            outcomes.append(EventOutcome(ev, "predicted", lead))
        elif late[i]:
            lag = (ev.cross_frame - min(late[i])) / frame_rate
            outcomes.append(EventOutcome(ev, "late", lag))
        else:
            outcomes.append(EventOutcome(ev, "missed", None))

    lead_times = [o.time_s for o in outcomes if o.status == "predicted"]
    n_missed = sum(1 for o in outcomes if o.status == "missed")
    return PredictionTimeStats(
        outcomes=outcomes,
        false_alarms=false_alarms,
        mean_time_s=float(np.mean(lead_times)) if lead_times else float("nan"),
        median_time_s=float(np.median(lead_times)) if lead_times else float("nan"),
        miss_rate=n_missed / len(events) if events else 0.0,
    )


def corpus_prediction_stats(
    model: Model, corpus: LabeledCorpus, n: int, horizon_s: float = 6.0
) -> PredictionTimeStats:
    """Prediction-time statistics over every held-out split of a corpus."""
    all_points: list[PredictionPoint] = []
    all_events: list[LaneChangeEvent] = []
    frame_rate = 10.0
    for split_idx, split in enumerate(corpus.test_splits):
        frame_rate = split.sequence.frame_rate
        timeline = classification_timeline(model, split, n)
        # Offset vehicle ids per split so scenarios never cross-match.
        offset = (split_idx + 1) * 1_000_000
        for pt in timeline_prediction_points(timeline):
            all_points.append(PredictionPoint(pt.vehicle_id + offset, pt.frame, pt.direction))
        for ev in split.reference_events:
            all_events.append(
                LaneChangeEvent(ev.vehicle_id + offset, ev.cross_frame,
                                ev.start_frame, ev.end_frame, ev.direction)
            )
    return prediction_time(all_points, all_events, frame_rate, horizon_s)


# --- history-length sweep ------------------------------------------------------

@dataclass
class SweepCell:
    kind: str
    n: int
    seed: int
    overall_accuracy: float
    acc_left: float
    acc_follow: float
    acc_right: float
    train_seconds: float  # wall clock; reported in JSON, kept out of CSVs
    n_train_segments: int
    confusion_counts: list  # 3x3 counts behind the accuracies


def history_sweep(
    corpus: LabeledCorpus,
    cfg: EvalConfig = EvalConfig(),
    train_cfg: TrainConfig = TrainConfig(),
    balance_seed: int = 0,
    embed_dim: int = 64,
    hidden_dim: int = 128,
) -> list[SweepCell]:
    """Train every (kind, history length, seed) cell and score it on the
    class-balanced held-out segments."""
    cells: list[SweepCell] = []
    for kind in cfg.kinds:
        for n in cfg.n_values:
            x_test, y_test = balanced_test_arrays(corpus, n, balance_seed)
            for seed in cfg.sweep_seeds:
                started = time.perf_counter()
                trained = train_on_corpus(
                    corpus, kind, n, replace(train_cfg, seed=seed),
                    balance_seed=balance_seed,
                    embed_dim=embed_dim, hidden_dim=hidden_dim,
                )
                elapsed = time.perf_counter() - started
                matrix = confusion(trained.model, x_test, y_test)
                per_class = matrix.per_class_accuracy
                cells.append(
                    SweepCell(
                        kind=kind, n=n, seed=seed,
                        overall_accuracy=matrix.overall_accuracy,
                        acc_left=float(per_class[0]),
                        acc_follow=float(per_class[1]),
                        acc_right=float(per_class[2]),
                        train_seconds=elapsed,
                        n_train_segments=trained.n_train_segments,
                        confusion_counts=matrix.counts.tolist(),
                    )
                )
    return cells


def sweep_means(cells: TypingSequence[SweepCell]) -> dict[tuple[str, int], dict]:
    """Aggregate seed cells into per-(kind, n) mean and std accuracy."""
    grouped: dict[tuple[str, int], list[SweepCell]] = {}
    for cell in cells:
        grouped.setdefault((cell.kind, cell.n), []).append(cell)
    out = {}
    for key, group in sorted(grouped.items()):
        accs = np.array([c.overall_accuracy for c in group])
        out[key] = {
            "mean_overall": float(accs.mean()),
            "std_overall": float(accs.std()),
            "mean_left": float(np.mean([c.acc_left for c in group])),
            "mean_follow": float(np.mean([c.acc_follow for c in group])),
            "mean_right": float(np.mean([c.acc_right for c in group])),
            "seeds": [c.seed for c in group],
        }
    return out


def write_sweep_csv(cells: TypingSequence[SweepCell], path: Union[str, Path]) -> None:
    """Deterministic sweep table; wall-clock timings live in the JSON report."""
    rows = sorted(cells, key=lambda c: (c.kind, c.n, c.seed))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "n", "seed", "acc_left", "acc_follow", "acc_right",
                         "overall_accuracy", "n_train_segments"])
        for c in rows:
            writer.writerow([c.kind, c.n, c.seed, repr(c.acc_left), repr(c.acc_follow),
                             repr(c.acc_right), repr(c.overall_accuracy), c.n_train_segments])


def plot_sweep(cells: TypingSequence[SweepCell], path: Union[str, Path]) -> None:
    """Accuracy vs history length, one curve per model kind."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    means = sweep_means(cells)
    kinds = sorted({c.kind for c in cells})
    fig, ax = plt.subplots(figsize=(6, 4))
    for kind in kinds:
        ns = sorted({n for k, n in means if k == kind})
        ys = [100.0 * means[(kind, n)]["mean_overall"] for n in ns]
        ax.plot(ns, ys, marker="o", label=kind)
    ax.set_xlabel("history length (steps)")
    ax.set_ylabel("overall accuracy (%)")
    ax.set_title("Held-out accuracy vs history length")
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
