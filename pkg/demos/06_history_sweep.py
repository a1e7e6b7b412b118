#!/usr/bin/env python3
"""History-length sweep: accuracy of each model kind at n = 6, 9, 12 steps.

Repackages the same labeled corpus at each history length, trains every
(kind, n, seed) cell, and emits the comparison table and the accuracy-vs-n
plot with one curve per kind. Longer histories should help (or at least not
hurt) the sequence model.

Takes a few minutes at these settings.
"""

from pathlib import Path

from laneintent import CorpusConfig, EvalConfig, TrainConfig, history_sweep
from laneintent.evaluate import plot_sweep, sweep_means, write_sweep_csv
from laneintent.pipeline import build_synthetic_corpus

OUT = Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

corpus = build_synthetic_corpus(CorpusConfig(seed=3, n_scenarios=14, duration_s=80.0,
                                             test_minutes=0.4))
cells = history_sweep(
    corpus,
    EvalConfig(n_values=(6, 9, 12), kinds=("lstm", "ffnn", "logreg"),
               sweep_seeds=(0, 1)),
    TrainConfig(learning_rate=0.01, batch_size=16, max_epochs=15, patience=15),
)

write_sweep_csv(cells, OUT / "sweep.csv")
plot_sweep(cells, OUT / "sweep.png")

print("mean held-out accuracy over seeds:")
for (kind, n), stats in sorted(sweep_means(cells).items()):
    print(f"  {kind:7s} n={n:2d}: {100 * stats['mean_overall']:6.2f}% "
          f"(std {100 * stats['std_overall']:.2f})")
print(f"\ntable -> {OUT / 'sweep.csv'}\nplot  -> {OUT / 'sweep.png'}")
