"""Command-line entry point: stage subcommands plus the full replication run.

Every stage reads prior-stage artifacts, writes versioned outputs with a JSON
sidecar carrying the producing config's section hashes, and verifies the
hashes of the sections it consumes. Deterministic outputs (CSV tables,
checkpoints) are byte-reproducible given the same config and seed; wall-clock
timings are confined to JSON reports.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, git_commit_hash
from .evaluate import (
    NGSIM_REFERENCE_ACCURACY,
    confusion,
    corpus_prediction_stats,
    history_sweep,
    plot_sweep,
    prediction_time,
    sweep_means,
    timeline_prediction_points,
    write_sweep_csv,
)
from .features import (
    compute_feature_table,
    fit_normalization,
    load_segments,
    save_segments,
)
from .ingest import (
    LATERAL_CONVENTION,
    SiteGeometry,
    parse_trajectory_table,
    split_sequence,
)
from .labeling import (
    Maneuver,
    Segment,
    balance_classes,
    detect_events,
    label_steps,
    package_segments,
    read_label_table,
    write_event_table,
    write_label_table,
)
from .models import (
    ModelSpec,
    build,
    load_model,
    one_hot_labels,
    save_model,
    segments_to_arrays,
    train,
    write_history_csv,
)
from .nn_core import grad_check
from .pipeline import (
    balanced_test_arrays,
    build_synthetic_corpus,
    corpus_from_sequences,
    train_on_corpus,
)
from .synthetic import corpus_specs, generate, spec_from_file, write_table


class CliError(Exception):
    """User-facing failure; printed without a traceback."""


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise CliError(f"missing {what}: {path}")
    return path


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_file(_require(Path(args.config), "config file")) \
        if getattr(args, "config", None) else RunConfig()
    overrides = {
        "seed": getattr(args, "seed", None),
        "model_kind": getattr(args, "kind", None),
        "labeling__theta_bound": getattr(args, "theta_bound", None),
        "labeling__n": getattr(args, "n", None),
        "features__augmented": getattr(args, "augmented", None),
        "training__max_epochs": getattr(args, "epochs", None),
    }
    cfg = cfg.with_overrides(**overrides)
    if getattr(args, "seed", None) is not None:
        # one --seed flag drives corpus generation, balancing, and training
        cfg = cfg.with_overrides(
            corpus__seed=args.seed, training__seed=args.seed, balance_seed=args.seed
        )
    return cfg


def _write_sidecar(out_dir: Path, stage: str, cfg: RunConfig, extra: dict | None = None) -> None:
    doc = {
        "stage": stage,
        "tool_version": __version__,
        "commit": git_commit_hash(),
        "section_hashes": cfg.section_hashes(),
        "lateral_convention": LATERAL_CONVENTION,
        "config": cfg.to_dict(),
    }
    if extra:
        doc.update(extra)
    (out_dir / f"{stage}.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _check_compat(artifact: Path, cfg: RunConfig, sections: tuple[str, ...], stage: str) -> None:
    """Compare the producing stage's section hashes with the current config's."""
    sidecar = artifact.parent / f"{stage}.json"
    if not sidecar.exists():
        print(f"note: no {stage} sidecar next to {artifact}; skipping compatibility check",
              file=sys.stderr)
        return
    recorded = json.loads(sidecar.read_text()).get("section_hashes", {})
    for section in sections:
        if section in recorded and recorded[section] != cfg.section_hash(section):
            raise CliError(
                f"config section {section!r} changed since {artifact} was produced "
                f"(hash {recorded[section]} != {cfg.section_hash(section)}); "
                f"rerun the earlier stage or restore the config"
            )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_sequence(table: Path, site_path: Path, cfg: RunConfig, unit: str = "meters"):
    site = SiteGeometry.from_file(_require(site_path, "site geometry file"))
    return parse_trajectory_table(_require(table, "trajectory table"), site,
                                  unit=unit, frame_rate=cfg.frame_rate)


# --- subcommands ----------------------------------------------------------------

def cmd_synth(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    if args.spec:
        specs = [spec_from_file(_require(Path(args.spec), "scenario spec"))]
    else:
        c = cfg.corpus
        specs = corpus_specs(
            c.seed, c.n_scenarios, lane_count=c.lane_count, n_vehicles=c.n_vehicles,
            duration_s=c.duration_s, jitter_amplitude=c.jitter_amplitude,
            max_changes=c.max_changes,
        )
    site = specs[0].site
    site.to_file(out / "site.txt")
    truth_rows = []
    for idx, spec in enumerate(specs):
        seq, truth = generate(spec)
        write_table(seq, out / f"scenario_{idx:03d}.txt")
        for ev in truth:
            truth_rows.append([idx, ev.vehicle_id, ev.cross_frame, ev.start_frame,
                               ev.end_frame, ev.direction.label])
    with open(out / "ground_truth.csv", "w", newline="") as fh:
        import csv as _csv

        writer = _csv.writer(fh)
        writer.writerow(["scenario", "vehicle_id", "cross_frame", "start_frame",
                         "end_frame", "direction"])
        writer.writerows(truth_rows)
    _write_sidecar(out, "synth", cfg, {"n_scenarios": len(specs),
                                       "n_events": len(truth_rows)})
    print(f"wrote {len(specs)} scenario tables and {len(truth_rows)} ground-truth events to {out}")
    return 0


def cmd_ingest(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    unit = args.unit or cfg.unit
    seq = _load_sequence(Path(args.table), Path(args.site), cfg, unit=unit)
    write_table(seq, out / "sequence.txt")
    seq.site.to_file(out / "site.txt")
    extra = {
        "unit_in": unit,
        "n_vehicles": len(seq.vehicle_ids()),
        "frames": [seq.start_frame, seq.end_frame],
    }
    if args.test_minutes is not None:
        train_seq, test_seq = split_sequence(seq, args.test_minutes)
        write_table(train_seq, out / "train.txt")
        write_table(test_seq, out / "test.txt")
        extra["test_minutes"] = args.test_minutes
        extra["test_frames"] = test_seq.n_frames
        extra["train_frames"] = train_seq.n_frames
    _write_sidecar(out, "ingest", cfg, extra)
    print(f"ingested {len(seq.vehicle_ids())} vehicles over "
          f"frames [{seq.start_frame}, {seq.end_frame}] into {out}")
    return 0


def cmd_label(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    seq = _load_sequence(Path(args.table), Path(args.site), cfg)
    events, crosses = detect_events(seq, cfg.labeling)
    labels = label_steps(seq, events)
    write_event_table(events, out / "events.csv")
    write_label_table(labels, out / "labels.csv")
    by_label = {m.label: sum(1 for sl in labels if sl.label == m) for m in Maneuver}
    _write_sidecar(out, "label", cfg, {
        "theta_bound_deg": cfg.labeling.theta_bound,
        "delta_t_s": cfg.labeling.delta_t,
        "n_cross_points": len(crosses),
        "n_events": len(events),
        "label_counts": by_label,
        "inputs": {"table": str(args.table)},
    })
    print(f"{len(events)} events, label counts {by_label}; wrote {out}/events.csv, labels.csv")
    return 0


def cmd_featurize(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    labels_path = _require(Path(args.labels), "label table")
    _check_compat(labels_path, cfg, ("labeling",), "label")
    seq = _load_sequence(Path(args.table), Path(args.site), cfg)
    table = compute_feature_table(seq, cfg.labeling, cfg.features)
    labels = [sl for sl in read_label_table(labels_path)
              if (sl.vehicle_id, sl.frame) in table]
    segments = package_segments(labels, table, cfg.labeling.n)
    if not segments:
        raise CliError("no segments could be packaged (trajectories shorter than n?)")
    save_segments(out / "segments.bin", segments, cfg.features.names,
                  normalization=None, config_hash=cfg.config_hash())
    _write_sidecar(out, "featurize", cfg, {
        "n_segments": len(segments),
        "segment_length": cfg.labeling.n,
        "feature_dim": cfg.features.dim,
        "inputs": {"table": str(args.table), "labels": str(args.labels)},
    })
    print(f"packaged {len(segments)} segments of length {cfg.labeling.n} into {out}/segments.bin")
    return 0


def _segments_from_container(path: Path) -> tuple[list[Segment], dict]:
    x, y, sidecar = load_segments(path)
    n = x.shape[1]
    segments = [
        Segment(
            vehicle_id=int(vid),
            frames=tuple(range(int(last) - n + 1, int(last) + 1)),
            features=x[i],
            label=Maneuver(int(y[i])),
        )
        for i, (vid, last) in enumerate(zip(sidecar["vehicle_ids"], sidecar["last_frames"]))
    ]
    return segments, sidecar


def cmd_train(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    seg_path = _require(Path(args.segments), "segment container")
    _check_compat(seg_path, cfg, ("labeling", "features"), "featurize")
    segments, _ = _segments_from_container(seg_path)
    balanced = balance_classes(segments, cfg.balance_seed)
    stats = fit_normalization(balanced)
    x, y, _, _ = segments_to_arrays(balanced)
    spec = ModelSpec(cfg.model_kind, input_dim=x.shape[2], n=x.shape[1],
                     embed_dim=cfg.embed_dim, hidden_dim=cfg.hidden_dim)
    model = build(spec, seed=cfg.training.seed, norm=stats)
    started = time.perf_counter()
    history = train(model, x, y, cfg.training)
    elapsed = time.perf_counter() - started
    save_model(out / "model.ckpt", model, metadata={
        "config": cfg.to_dict(),
        "seed": cfg.training.seed,
        "normalization_hash": _hash_stats(stats),
    })
    write_history_csv(history, out / "history.csv")
    _write_sidecar(out, "train", cfg, {
        "kind": cfg.model_kind,
        "n_balanced_segments": len(balanced),
        "n_parameters": model.n_params,
        "epochs_run": len(history.epochs),
        "aborted": history.aborted,
        "train_seconds": elapsed,
        "inputs": {"segments": str(args.segments)},
    })
    status = "aborted" if history.aborted else "finished"
    print(f"{status} training {cfg.model_kind} on {len(balanced)} balanced segments "
          f"({len(history.epochs)} epochs, {elapsed:.1f}s); wrote {out}/model.ckpt")
    return 0


def _hash_stats(stats) -> str:
    import hashlib

    payload = json.dumps(stats.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    model = load_model(_require(Path(args.model), "model checkpoint"))
    seg_path = _require(Path(args.segments), "segment container")
    segments, _ = _segments_from_container(seg_path)
    if args.balance:
        segments = balance_classes(segments, cfg.balance_seed)
    x, y, vids, last_frames = segments_to_arrays(segments)
    matrix = confusion(model, x, y)
    matrix.write_csv(out / "confusion.csv")

    report = {
        "stage": "eval",
        "commit": git_commit_hash(),
        "config": cfg.to_dict(),
        "section_hashes": cfg.section_hashes(),
        "lateral_convention": LATERAL_CONVENTION,
        "model_kind": model.spec.kind,
        "n_test_segments": len(segments),
        "confusion": matrix.to_dict(),
        "reference_accuracy_pct": NGSIM_REFERENCE_ACCURACY,
    }
    if args.events:
        events_path = _require(Path(args.events), "event table")
        events = _read_events_csv(events_path)
        from .models import classify_batch

        predicted = classify_batch(model, x)
        timeline: dict[int, list[tuple[int, Maneuver]]] = {}
        for vid, frame, label in zip(vids, last_frames, predicted):
            timeline.setdefault(int(vid), []).append((int(frame), Maneuver(int(label))))
        points = timeline_prediction_points(timeline)
        stats = prediction_time(points, events, cfg.frame_rate, cfg.eval.horizon_s)
        report["prediction_time"] = stats.to_dict()
    (out / "eval.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"overall accuracy {matrix.overall_accuracy:.4f}; wrote {out}/confusion.csv, eval.json")
    return 0


def _read_events_csv(path: Path):
    import csv as _csv

    from .labeling import LaneChangeEvent

    events = []
    with open(path, newline="") as fh:
        for row in _csv.DictReader(fh):
            events.append(
                LaneChangeEvent(
                    vehicle_id=int(row["vehicle_id"]),
                    cross_frame=int(row["cross_frame"]),
                    start_frame=int(row["start_frame"]),
                    end_frame=int(row["end_frame"]),
                    direction=Maneuver.from_label(row["direction"]),
                )
            )
    return events


def _build_corpus(cfg: RunConfig, data: str):
    if data == "synthetic":
        return build_synthetic_corpus(cfg.corpus, cfg.labeling, cfg.features)
    data_dir = Path(data)
    site = SiteGeometry.from_file(_require(data_dir / "site.txt", "site geometry file"))
    tables = sorted(p for p in data_dir.glob("*.txt") if p.name != "site.txt")
    if not tables:
        raise CliError(f"no trajectory tables found in {data_dir}")
    pairs = [
        (parse_trajectory_table(t, site, unit="meters", frame_rate=cfg.frame_rate), [])
        for t in tables
    ]
    return corpus_from_sequences(pairs, cfg.labeling, cfg.features,
                                 test_minutes=cfg.corpus.test_minutes)


def cmd_sweep(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    corpus = _build_corpus(cfg, args.data)
    cells = history_sweep(
        corpus, cfg.eval, cfg.training, cfg.balance_seed,
        embed_dim=cfg.embed_dim, hidden_dim=cfg.hidden_dim,
    )
    write_sweep_csv(cells, out / "sweep.csv")
    plot_sweep(cells, out / "sweep.png")
    means = {f"{k}_n{n}": v for (k, n), v in sweep_means(cells).items()}
    _write_sidecar(out, "sweep", cfg, {
        "cells": [dataclasses.asdict(c) for c in cells],
        "means": means,
    })
    print(f"swept {len(cells)} (kind, n, seed) cells; wrote {out}/sweep.csv, sweep.png")
    return 0


GRADCHECK_DIMS = {"input_dim": 4, "n": 6, "embed_dim": 8, "hidden_dim": 8}


def cmd_gradcheck(args) -> int:
    rng = np.random.default_rng(args.seed if args.seed is not None else 0)
    spec = ModelSpec(args.kind, **GRADCHECK_DIMS)
    model = build(spec, seed=int(rng.integers(0, 2 ** 31)))
    x = rng.normal(size=(3, spec.n, spec.input_dim))
    labels = one_hot_labels(rng.integers(0, 3, size=3))

    def loss_fn():
        return model.loss_and_grads(x, labels)

    started = time.perf_counter()
    report = grad_check(loss_fn, model.params, eps=args.eps, tol=args.tol)
    elapsed = time.perf_counter() - started
    print(f"gradient check: {args.kind} at reduced dims {GRADCHECK_DIMS}, "
          f"{report.n_checked} parameters, eps {args.eps:g}")
    for name in sorted(report.per_param):
        print(f"  {name:12s} max rel err {report.per_param[name]:.3e}")
    print(f"max relative error {report.max_rel_err:.3e} "
          f"(tolerance {report.tol:g}, worst block {report.worst_param!r}, {elapsed:.1f}s)")
    print("PASS" if report.passed else "FAIL")
    return 0 if report.passed else 1


def cmd_replicate(args) -> int:
    cfg = _load_config(args)
    out = _out_dir(args)
    started_all = time.perf_counter()
    corpus = _build_corpus(cfg, args.data)
    _write_audit_tables(corpus, out)

    n = cfg.labeling.n
    kinds = tuple(args.kinds.split(",")) if args.kinds else cfg.eval.kinds
    x_test, y_test = balanced_test_arrays(corpus, n, cfg.balance_seed)
    headline = {}
    timings = {}
    for kind in kinds:
        t0 = time.perf_counter()
        trained = train_on_corpus(
            corpus, kind, n, cfg.training, cfg.balance_seed,
            embed_dim=cfg.embed_dim, hidden_dim=cfg.hidden_dim,
        )
        timings[kind] = time.perf_counter() - t0
        matrix = confusion(trained.model, x_test, y_test)
        matrix.write_csv(out / f"confusion_{kind}_n{n}.csv")
        save_model(out / f"model_{kind}_n{n}.ckpt", trained.model, metadata={
            "config": cfg.to_dict(), "kind": kind, "n": n,
        })
        write_history_csv(trained.history, out / f"history_{kind}_n{n}.csv")
        stats = corpus_prediction_stats(trained.model, corpus, n, cfg.eval.horizon_s)
        headline[kind] = {
            "overall_accuracy": matrix.overall_accuracy,
            "confusion": matrix.to_dict(),
            "prediction_time": stats.to_dict(),
            "n_train_segments": trained.n_train_segments,
            "epochs_run": len(trained.history.epochs),
        }
        print(f"{kind}: accuracy {matrix.overall_accuracy:.4f} on {len(y_test)} "
              f"balanced test segments ({timings[kind]:.1f}s)")

    sweep_section = None
    if not args.no_sweep:
        cells = history_sweep(
            corpus, dataclasses.replace(cfg.eval, kinds=kinds), cfg.training,
            cfg.balance_seed, embed_dim=cfg.embed_dim, hidden_dim=cfg.hidden_dim,
        )
        write_sweep_csv(cells, out / "sweep.csv")
        plot_sweep(cells, out / "sweep.png")
        sweep_section = {
            "cells": [dataclasses.asdict(c) for c in cells],
            "means": {f"{k}_n{nv}": v for (k, nv), v in sweep_means(cells).items()},
        }

    report = {
        "stage": "replicate",
        "data": args.data,
        "commit": git_commit_hash(),
        "config": cfg.to_dict(),
        "section_hashes": cfg.section_hashes(),
        "lateral_convention": LATERAL_CONVENTION,
        "headline_n": n,
        "results": headline,
        "reference_accuracy_pct": NGSIM_REFERENCE_ACCURACY,
        "sweep": sweep_section,
        "train_seconds": timings,
        "total_seconds": time.perf_counter() - started_all,
    }
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(f"replication report written to {out}/report.json")
    return 0


def _write_audit_tables(corpus, out: Path) -> None:
    """Combined event and label audit CSVs across all splits."""
    import csv as _csv

    with open(out / "events.csv", "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["split", "scenario", "vehicle_id", "cross_frame",
                         "start_frame", "end_frame", "direction", "low_confidence"])
        for split_name, splits in (("train", corpus.train_splits), ("test", corpus.test_splits)):
            for idx, split in enumerate(splits):
                for ev in sorted(split.events, key=lambda e: (e.vehicle_id, e.cross_frame)):
                    writer.writerow([split_name, idx, ev.vehicle_id, ev.cross_frame,
                                     ev.start_frame, ev.end_frame, ev.direction.label,
                                     int(ev.low_confidence)])
    with open(out / "labels.csv", "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(["split", "scenario", "vehicle_id", "frame", "label"])
        for split_name, splits in (("train", corpus.train_splits), ("test", corpus.test_splits)):
            for idx, split in enumerate(splits):
                for sl in sorted(split.labels, key=lambda s: (s.vehicle_id, s.frame)):
                    writer.writerow([split_name, idx, sl.vehicle_id, sl.frame, sl.label.label])


# --- parser ---------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, out_default: str | None = None) -> None:
    p.add_argument("--config", help="run-config JSON file")
    p.add_argument("--seed", type=int, help="override every seed in the config")
    if out_default is not None:
        p.add_argument("--out", default=out_default, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="laneintent",
        description="Lane-change intention labeling, training, and evaluation toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate synthetic scenario tables")
    _add_common(p, "out/synth")
    p.add_argument("--spec", help="single scenario spec JSON (default: corpus from config)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="parse and normalize a trajectory table")
    _add_common(p, "out/ingest")
    p.add_argument("--table", required=True, help="raw trajectory table")
    p.add_argument("--site", required=True, help="site geometry file")
    p.add_argument("--unit", choices=["feet", "meters"], help="input units")
    p.add_argument("--test-minutes", type=float, dest="test_minutes",
                   help="also split off the leading test window")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("label", help="detect lane changes and label every step")
    _add_common(p, "out/label")
    p.add_argument("--table", required=True, help="normalized table (meters)")
    p.add_argument("--site", required=True)
    p.add_argument("--theta-bound", type=float, dest="theta_bound",
                   help="heading threshold in degrees")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("featurize", help="compute features and package segments")
    _add_common(p, "out/featurize")
    p.add_argument("--table", required=True)
    p.add_argument("--site", required=True)
    p.add_argument("--labels", required=True, help="labels.csv from the label stage")
    p.add_argument("-n", type=int, dest="n", help="segment length in steps")
    p.add_argument("--augmented", action="store_const", const=True,
                   help="append traffic-factor inputs (22-dim features)")
    p.set_defaults(func=cmd_featurize)

    p = sub.add_parser("train", help="balance, normalize, and train a classifier")
    _add_common(p, "out/train")
    p.add_argument("--segments", required=True, help="segments.bin from featurize")
    p.add_argument("--kind", choices=["lstm", "ffnn", "logreg"])
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="confusion matrix and prediction-time report")
    _add_common(p, "out/eval")
    p.add_argument("--model", required=True, help="model checkpoint")
    p.add_argument("--segments", required=True, help="test segments.bin")
    p.add_argument("--events", help="event CSV for prediction-time matching")
    p.add_argument("--balance", action="store_true",
                   help="class-balance the test segments before scoring")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="history-length sweep across model kinds")
    _add_common(p, "out/sweep")
    p.add_argument("--data", default="synthetic",
                   help="'synthetic' or a directory of tables + site.txt")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gradcheck", help="finite-difference check of the composed model")
    p.add_argument("--kind", default="lstm", choices=["lstm", "ffnn", "logreg"])
    p.add_argument("--eps", type=float, default=1e-5)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("replicate", help="full pipeline: label, train, evaluate, sweep")
    _add_common(p, "out/replicate")
    p.add_argument("--data", default="synthetic",
                   help="'synthetic' or a directory of tables + site.txt")
    p.add_argument("--kinds", help="comma-separated model kinds (default: config)")
    p.add_argument("--no-sweep", action="store_true", help="skip the history-length sweep")
    p.add_argument("--epochs", type=int)
    p.set_defaults(func=cmd_replicate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
