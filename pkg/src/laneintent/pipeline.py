"""Stage glue: build labeled corpora and train classifiers over them.

A corpus is a set of scenarios, each split temporally into train and test
sequences that are labeled and featurized independently (no statistics leak
across the split). Segments are packaged per requested history length so the
same labeled corpus can back the whole history-length sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .features import (
    FeatureConfig,
    NormalizationStats,
    compute_feature_table,
    fit_normalization,
)
from .ingest import Sequence, split_sequence
from .labeling import (
    LabelingConfig,
    LaneChangeEvent,
    Segment,
    StepLabel,
    balance_classes,
    detect_events,
    label_steps,
    package_segments,
)
from .models import Model, ModelSpec, TrainingHistory, build, segments_to_arrays, train
from .nn_core import TrainConfig
from .synthetic import corpus_specs, generate


@dataclass(frozen=True)
class CorpusConfig:
    seed: int = 0
    n_scenarios: int = 40
    n_vehicles: int = 3
    lane_count: int = 3
    duration_s: float = 100.0
    jitter_amplitude: float = 0.05
    test_minutes: float = 0.5  # leading slice of each scenario held out
    max_changes: int = 2


@dataclass
class LabeledSplit:
    """One sequence with its detected events, step labels, and feature table."""

    sequence: Sequence
    events: list[LaneChangeEvent]
    labels: list[StepLabel]
    feature_table: dict[tuple[int, int], np.ndarray]
    truth: list[LaneChangeEvent] = field(default_factory=list)

    def segments(self, n: int) -> list[Segment]:
        return package_segments(self.labels, self.feature_table, n)

    @property
    def reference_events(self) -> list[LaneChangeEvent]:
        """Scripted ground truth when available, else the detected events."""
        return self.truth if self.truth else self.events


@dataclass
class LabeledCorpus:
    train_splits: list[LabeledSplit]
    test_splits: list[LabeledSplit]
    feature_names: tuple[str, ...]
    feature_dim: int

    def train_segments(self, n: int) -> list[Segment]:
        return [seg for split in self.train_splits for seg in split.segments(n)]

    def test_segments(self, n: int) -> list[Segment]:
        return [seg for split in self.test_splits for seg in split.segments(n)]


def label_and_featurize(
    seq: Sequence,
    labeling_cfg: LabelingConfig,
    feature_cfg: FeatureConfig,
    truth: Iterable[LaneChangeEvent] = (),
) -> LabeledSplit:
    """Run detection, step labeling, and feature extraction on one sequence.

    Step labels are restricted to frames that have feature vectors (vehicles
    shorter than three frames have neither headings nor features).
    """
    events, _ = detect_events(seq, labeling_cfg)
    labels = label_steps(seq, events)
    table = compute_feature_table(seq, labeling_cfg, feature_cfg)
    labels = [sl for sl in labels if (sl.vehicle_id, sl.frame) in table]
    return LabeledSplit(seq, events, labels, table, truth=list(truth))


def _truth_in_window(truth: list[LaneChangeEvent], lo: int, hi: int) -> list[LaneChangeEvent]:
    return [ev for ev in truth if lo <= ev.cross_frame <= hi]


def corpus_from_sequences(
    pairs: Iterable[tuple[Sequence, list[LaneChangeEvent]]],
    labeling_cfg: LabelingConfig = LabelingConfig(),
    feature_cfg: FeatureConfig = FeatureConfig(),
    test_minutes: float = 0.5,
) -> LabeledCorpus:
    """Split, label, and featurize prepared sequences (ground truth optional)."""
    train_splits: list[LabeledSplit] = []
    test_splits: list[LabeledSplit] = []
    for seq, truth in pairs:
        train_seq, test_seq = split_sequence(seq, test_minutes)
        train_splits.append(
            label_and_featurize(
                train_seq, labeling_cfg, feature_cfg,
                truth=_truth_in_window(truth, train_seq.start_frame, train_seq.end_frame),
            )
        )
        test_splits.append(
            label_and_featurize(
                test_seq, labeling_cfg, feature_cfg,
                truth=_truth_in_window(truth, test_seq.start_frame, test_seq.end_frame),
            )
        )
    return LabeledCorpus(
        train_splits=train_splits,
        test_splits=test_splits,
        feature_names=feature_cfg.names,
        feature_dim=feature_cfg.dim,
    )


def corpus_from_specs(
    specs,
    labeling_cfg: LabelingConfig = LabelingConfig(),
    feature_cfg: FeatureConfig = FeatureConfig(),
    test_minutes: float = 0.5,
) -> LabeledCorpus:
    """Generate, split, label, and featurize explicit scenario specs."""
    return corpus_from_sequences(
        (generate(spec) for spec in specs), labeling_cfg, feature_cfg, test_minutes
    )


def build_synthetic_corpus(
    corpus_cfg: CorpusConfig = CorpusConfig(),
    labeling_cfg: LabelingConfig = LabelingConfig(),
    feature_cfg: FeatureConfig = FeatureConfig(),
) -> LabeledCorpus:
    """Generate, split, label, and featurize a family of random scenarios."""
    specs = corpus_specs(
        corpus_cfg.seed,
        corpus_cfg.n_scenarios,
        lane_count=corpus_cfg.lane_count,
        n_vehicles=corpus_cfg.n_vehicles,
        duration_s=corpus_cfg.duration_s,
        jitter_amplitude=corpus_cfg.jitter_amplitude,
        max_changes=corpus_cfg.max_changes,
    )
    return corpus_from_specs(specs, labeling_cfg, feature_cfg, corpus_cfg.test_minutes)


@dataclass
class TrainedModel:
    model: Model
    history: TrainingHistory
    stats: NormalizationStats
    n_train_segments: int


def train_on_corpus(
    corpus: LabeledCorpus,
    kind: str,
    n: int,
    train_cfg: TrainConfig,
    balance_seed: int = 0,
    embed_dim: int = 64,
    hidden_dim: int = 128,
) -> TrainedModel:
    """Balance the train segments, fit normalization on them, train a model."""
    balanced = balance_classes(corpus.train_segments(n), balance_seed)
    stats = fit_normalization(balanced)
    x, y, _, _ = segments_to_arrays(balanced)
    spec = ModelSpec(kind, input_dim=corpus.feature_dim, n=n,
                     embed_dim=embed_dim, hidden_dim=hidden_dim)
    model = build(spec, seed=train_cfg.seed, norm=stats)
    history = train(model, x, y, train_cfg)
    return TrainedModel(model=model, history=history, stats=stats,
                        n_train_segments=len(balanced))


def balanced_test_arrays(
    corpus: LabeledCorpus, n: int, balance_seed: int = 0
) -> tuple[np.ndarray, np.ndarray]:
    """Class-balanced held-out segments as arrays (features, labels)."""
    balanced = balance_classes(corpus.test_segments(n), balance_seed)
    x, y, _, _ = segments_to_arrays(balanced)
    return x, y
