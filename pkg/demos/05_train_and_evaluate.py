#!/usr/bin/env python3
"""Small end-to-end run: corpus, balanced training, confusion, lead times.

Builds a modest synthetic corpus, trains the LSTM classifier and the two
baselines on class-balanced segments, and reports row-normalized confusion
matrices next to the published NGSIM reference card, plus the prediction-time
statistic (how many seconds before the crossing the 3-consecutive-step rule
fires).

Runs in roughly a minute; scale n_scenarios/max_epochs up for stronger models.
"""

import time
from pathlib import Path

from laneintent import CorpusConfig, Maneuver, TrainConfig, confusion
from laneintent.evaluate import (
    NGSIM_REFERENCE_ACCURACY,
    corpus_prediction_stats,
)
from laneintent.pipeline import (
    balanced_test_arrays,
    build_synthetic_corpus,
    train_on_corpus,
)

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

N = 9  # history length in steps

corpus_cfg = CorpusConfig(seed=3, n_scenarios=14, duration_s=80.0, test_minutes=0.4)
print("building corpus...", flush=True)
corpus = build_synthetic_corpus(corpus_cfg)
print(f"  {len(corpus.train_segments(N))} train / {len(corpus.test_segments(N))} "
      f"test segments before balancing")

train_cfg = TrainConfig(learning_rate=0.01, batch_size=16, max_epochs=20, patience=20)
x_test, y_test = balanced_test_arrays(corpus, N)
print(f"  balanced test set: {len(y_test)} segments\n")

for kind in ("lstm", "ffnn", "logreg"):
    started = time.perf_counter()
    trained = train_on_corpus(corpus, kind, N, train_cfg)
    elapsed = time.perf_counter() - started
    matrix = confusion(trained.model, x_test, y_test)
    print(f"{kind}: {trained.n_train_segments} balanced segments, "
          f"{len(trained.history.epochs)} epochs, {elapsed:.1f}s, "
          f"accuracy {100 * matrix.overall_accuracy:.2f}%")
    for i, maneuver in enumerate(Maneuver):
        ours = " ".join(f"{v:6.2f}" for v in matrix.normalized[i])
        ref = " ".join(f"{v:6.2f}" for v in NGSIM_REFERENCE_ACCURACY[kind][i])
        print(f"   true {maneuver.label:6s} | ours: {ours}   reference: {ref}")

    if kind == "lstm":
        stats = corpus_prediction_stats(trained.model, corpus, N)
        d = stats.to_dict()
        print(f"   prediction points vs {d['n_events']} held-out events: "
              f"{d['by_status']}, mean lead {d['mean_time_s']:.2f} s, "
              f"median {d['median_time_s']:.2f} s, "
              f"{d['n_false_alarms']} false alarms")
    print()
