"""CLI tests: each stage end to end in a temp tree, hash compatibility, exit codes."""

from __future__ import annotations

import json
import subprocess
import sys

import pytest

from laneintent.cli import main

SCENARIO_SPEC = {
    "seed": 5,
    "duration_s": 60.0,
    "lane_count": 3,
    "frame_rate": 10.0,
    "jitter_amplitude": 0.05,
    "vehicles": [
        {
            "vehicle_id": 1, "lane": 1, "speed": 25.0,
            "changes": [
                {"start_s": 10.0, "direction": "left"},
                {"start_s": 30.0, "direction": "right"},
            ],
        },
        {
            "vehicle_id": 2, "lane": 3, "speed": 27.0, "y0": 80.0,
            "changes": [
                {"start_s": 12.0, "direction": "right"},
                {"start_s": 35.0, "direction": "left"},
            ],
        },
    ],
}

RUN_CONFIG = {
    "seed": 0,
    "model_kind": "logreg",
    "embed_dim": 8,
    "hidden_dim": 16,
    "corpus": {"n_scenarios": 6, "duration_s": 60.0, "test_minutes": 0.25, "seed": 5},
    "labeling": {"n": 6},
    "training": {"max_epochs": 3, "learning_rate": 0.05, "batch_size": 32, "seed": 0},
    "eval": {"n_values": [6], "kinds": ["logreg"], "sweep_seeds": [0]},
}


@pytest.fixture()
def workdir(tmp_path):
    (tmp_path / "scenario.json").write_text(json.dumps(SCENARIO_SPEC))
    (tmp_path / "run.json").write_text(json.dumps(RUN_CONFIG))
    return tmp_path


def run_cli(*argv) -> int:
    return main([str(a) for a in argv])


def stage_dirs(workdir):
    return {name: workdir / name for name in
            ("synth", "label", "feat", "train", "eval")}


def run_stage_chain(workdir):
    d = stage_dirs(workdir)
    cfg = workdir / "run.json"
    assert run_cli("synth", "--config", cfg, "--spec", workdir / "scenario.json",
                   "--out", d["synth"]) == 0
    table = d["synth"] / "scenario_000.txt"
    site = d["synth"] / "site.txt"
    assert run_cli("label", "--config", cfg, "--table", table, "--site", site,
                   "--out", d["label"]) == 0
    assert run_cli("featurize", "--config", cfg, "--table", table, "--site", site,
                   "--labels", d["label"] / "labels.csv", "--out", d["feat"]) == 0
    assert run_cli("train", "--config", cfg, "--segments", d["feat"] / "segments.bin",
                   "--out", d["train"]) == 0
    assert run_cli("eval", "--config", cfg, "--model", d["train"] / "model.ckpt",
                   "--segments", d["feat"] / "segments.bin",
                   "--events", d["label"] / "events.csv",
                   "--out", d["eval"]) == 0
    return d


class TestStageChain:
    def test_full_chain_artifacts(self, workdir):
        d = run_stage_chain(workdir)
        assert (d["synth"] / "ground_truth.csv").exists()
        assert (d["label"] / "events.csv").exists()
        assert (d["label"] / "labels.csv").exists()
        assert (d["feat"] / "segments.bin").exists()
        assert (d["feat"] / "segments.bin.json").exists()
        assert (d["train"] / "model.ckpt").exists()
        assert (d["train"] / "history.csv").exists()
        report = json.loads((d["eval"] / "eval.json").read_text())
        assert "confusion" in report and "prediction_time" in report
        assert "reference_accuracy_pct" in report
        assert report["lateral_convention"]

    def test_sidecars_carry_section_hashes(self, workdir):
        d = run_stage_chain(workdir)
        label_sidecar = json.loads((d["label"] / "label.json").read_text())
        feat_sidecar = json.loads((d["feat"] / "featurize.json").read_text())
        assert label_sidecar["section_hashes"]["labeling"] == \
            feat_sidecar["section_hashes"]["labeling"]
        assert label_sidecar["config"]["labeling"]["theta_bound"] == 2.0

    def test_ground_truth_events_recovered(self, workdir):
        d = run_stage_chain(workdir)
        truth = (d["synth"] / "ground_truth.csv").read_text().splitlines()[1:]
        events = (d["label"] / "events.csv").read_text().splitlines()[1:]
        assert len(truth) == 4
        assert len(events) == 4  # both scripted changes per vehicle recovered

    def test_hash_mismatch_between_stages(self, workdir):
        d = run_stage_chain(workdir)
        # Change the labeling section, then try to featurize with old labels.
        changed = dict(RUN_CONFIG)
        changed["labeling"] = {"n": 6, "theta_bound": 1.0}
        cfg2 = workdir / "run2.json"
        cfg2.write_text(json.dumps(changed))
        table = d["synth"] / "scenario_000.txt"
        site = d["synth"] / "site.txt"
        code = run_cli("featurize", "--config", cfg2, "--table", table, "--site", site,
                       "--labels", d["label"] / "labels.csv",
                       "--out", workdir / "feat2")
        assert code == 2

    def test_theta_bound_zero_full_window(self, workdir):
        d = stage_dirs(workdir)
        cfg = workdir / "run.json"
        run_cli("synth", "--config", cfg, "--spec", workdir / "scenario.json",
                "--out", d["synth"])
        code = run_cli("label", "--config", cfg, "--table", d["synth"] / "scenario_000.txt",
                       "--site", d["synth"] / "site.txt", "--theta-bound", "0",
                       "--out", workdir / "label0")
        assert code == 0
        rows = (workdir / "label0" / "events.csv").read_text().splitlines()[1:]
        for row in rows:
            _, cross, start, end, _, _ = row.split(",")
            # threshold never binds: the window is the full +/- 2 s span
            assert int(cross) - int(start) == 20
            assert int(end) - int(cross) == 20


class TestErrorPaths:
    def test_missing_input_names_file(self, workdir, capsys):
        code = run_cli("train", "--segments", workdir / "nope.bin",
                       "--out", workdir / "t")
        assert code == 2
        assert "nope.bin" in capsys.readouterr().err

    def test_unknown_config_key(self, workdir, capsys):
        bad = workdir / "bad.json"
        bad.write_text('{"unknown_thing": 1}')
        code = run_cli("synth", "--config", bad, "--out", workdir / "s")
        assert code == 2
        assert "unknown_thing" in capsys.readouterr().err

    def test_missing_site_file(self, workdir, capsys):
        d = stage_dirs(workdir)
        run_cli("synth", "--spec", workdir / "scenario.json", "--out", d["synth"])
        code = run_cli("label", "--table", d["synth"] / "scenario_000.txt",
                       "--site", workdir / "missing_site.txt", "--out", d["label"])
        assert code == 2


class TestGradcheckCommand:
    def test_pass_exit_zero(self, capsys):
        code = run_cli("gradcheck", "--kind", "lstm")
        out = capsys.readouterr().out
        assert code == 0
        assert "PASS" in out
        assert "max relative error" in out

    def test_unreachable_tolerance_fails(self, capsys):
        code = run_cli("gradcheck", "--kind", "lstm", "--tol", "1e-14")
        assert code == 1
        assert "FAIL" in capsys.readouterr().out


class TestReplicate:
    def test_synthetic_no_sweep(self, workdir):
        out = workdir / "rep"
        code = run_cli("replicate", "--config", workdir / "run.json",
                       "--data", "synthetic", "--kinds", "logreg",
                       "--no-sweep", "--out", out)
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert "logreg" in report["results"]
        assert (out / "confusion_logreg_n6.csv").exists()
        assert (out / "events.csv").exists()
        assert report["config"]["corpus"]["n_scenarios"] == 6

    def test_replicate_on_table_directory(self, workdir):
        d = stage_dirs(workdir)
        run_cli("synth", "--config", workdir / "run.json", "--out", d["synth"])
        out = workdir / "rep_dir"
        code = run_cli("replicate", "--config", workdir / "run.json",
                       "--data", d["synth"], "--kinds", "logreg",
                       "--no-sweep", "--out", out)
        assert code == 0
        assert (out / "report.json").exists()


class TestSweepCommand:
    def test_sweep_outputs(self, workdir):
        out = workdir / "sweep"
        code = run_cli("sweep", "--config", workdir / "run.json",
                       "--data", "synthetic", "--out", out)
        assert code == 0
        assert (out / "sweep.csv").exists()
        assert (out / "sweep.png").exists()
        lines = (out / "sweep.csv").read_text().splitlines()
        assert lines[0].startswith("kind,n,seed")
        assert len(lines) == 2  # one kind, one n, one seed


class TestEntryPoint:
    def test_module_invocation(self):
        proc = subprocess.run(
            [sys.executable, "-m", "laneintent.cli", "--version"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "laneintent" in proc.stdout
