"""Run-config tests: round trip, unknown keys, overrides, section hashes."""

from __future__ import annotations

import json

import pytest

from laneintent.config import ConfigError, RunConfig, git_commit_hash


class TestRoundTrip:
    def test_default_file_roundtrip(self, tmp_path):
        cfg = RunConfig()
        path = tmp_path / "run.json"
        cfg.to_file(path)
        assert RunConfig.from_file(path) == cfg

    def test_nested_sections_parsed(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({
            "seed": 7,
            "labeling": {"theta_bound": 1.5, "n": 6},
            "eval": {"n_values": [6, 9], "kinds": ["lstm"]},
        }))
        cfg = RunConfig.from_file(path)
        assert cfg.seed == 7
        assert cfg.labeling.theta_bound == 1.5
        assert cfg.labeling.n == 6
        assert cfg.eval.n_values == (6, 9)
        assert cfg.eval.kinds == ("lstm",)

    def test_unknown_top_level_key_rejected(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"bogus_knob": 1}')
        with pytest.raises(ConfigError, match="bogus_knob"):
            RunConfig.from_file(path)

    def test_unknown_section_key_rejected(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"labeling": {"theta_limit": 2.0}}')
        with pytest.raises(ConfigError, match="theta_limit"):
            RunConfig.from_file(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError, match="not valid JSON"):
            RunConfig.from_file(path)

    def test_invalid_value_rejected(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text('{"training": {"learning_rate": -1.0}}')
        with pytest.raises(ConfigError, match="training"):
            RunConfig.from_file(path)


class TestOverridesAndHashes:
    def test_override_nested(self):
        cfg = RunConfig().with_overrides(labeling__theta_bound=0.0, seed=3)
        assert cfg.labeling.theta_bound == 0.0
        assert cfg.seed == 3

    def test_none_overrides_ignored(self):
        cfg = RunConfig()
        assert cfg.with_overrides(seed=None) == cfg

    def test_hash_stable_and_section_scoped(self):
        a = RunConfig()
        b = RunConfig().with_overrides(labeling__theta_bound=0.5)
        assert a.config_hash() == RunConfig().config_hash()
        assert a.config_hash() != b.config_hash()
        assert a.section_hash("labeling") != b.section_hash("labeling")
        # untouched sections keep their hashes
        for section in ("corpus", "features", "training", "eval"):
            assert a.section_hash(section) == b.section_hash(section)

    def test_section_hashes_mapping(self):
        hashes = RunConfig().section_hashes()
        assert {"corpus", "labeling", "features", "training", "eval",
                "run", "config"} <= set(hashes)

    def test_commit_hash_returns_string(self):
        assert isinstance(git_commit_hash(), str)
