"""Run configuration: one JSON file covering every stage, with per-section
hashes for artifact compatibility checks.

Stage artifacts record the hashes of the config sections that produced them;
a downstream stage verifies only the sections it actually consumes, so
overriding, say, the labeling threshold invalidates label artifacts but not
the upstream tables.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import subprocess
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Union

from .evaluate import EvalConfig
from .features import FeatureConfig
from .labeling import LabelingConfig
from .nn_core import TrainConfig
from .pipeline import CorpusConfig


class ConfigError(ValueError):
    """Malformed run configuration."""


_TUPLE_FIELDS = {"n_values", "kinds", "sweep_seeds"}

_SECTIONS = {
    "corpus": CorpusConfig,
    "labeling": LabelingConfig,
    "features": FeatureConfig,
    "training": TrainConfig,
    "eval": EvalConfig,
}


def _from_dict(cls, doc: dict, context: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(doc) - names
    if unknown:
        raise ConfigError(f"unknown keys in {context}: {sorted(unknown)}")
    kwargs = {}
    for key, value in doc.items():
        if key in _TUPLE_FIELDS and isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid {context}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    unit: str = "feet"  # unit of raw ingest tables
    frame_rate: float = 10.0
    model_kind: str = "lstm"
    embed_dim: int = 64
    hidden_dim: int = 128
    balance_seed: int = 0
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    labeling: LabelingConfig = field(default_factory=LabelingConfig)
    features: FeatureConfig = field(default_factory=FeatureConfig)
    training: TrainConfig = field(default_factory=TrainConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict[str, Any]:
        doc = dataclasses.asdict(self)
        for key, value in list(doc.items()):
            doc[key] = _jsonable(value)
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        top_names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(doc) - top_names
        if unknown:
            raise ConfigError(f"unknown keys in run config: {sorted(unknown)}")
        kwargs: dict[str, Any] = {}
        for key, value in doc.items():
            if key in _SECTIONS:
                if not isinstance(value, dict):
                    raise ConfigError(f"section {key!r} must be a mapping")
                kwargs[key] = _from_dict(_SECTIONS[key], value, f"section {key!r}")
            else:
                kwargs[key] = value
        try:
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid run config: {exc}") from exc

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must contain a JSON object")
        return cls.from_dict(doc)

    def to_file(self, path: Union[str, Path]) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")

    # -- hashing ---------------------------------------------------------

    def config_hash(self) -> str:
        return _digest(self.to_dict())

    def section_hash(self, name: str) -> str:
        if name in _SECTIONS:
            payload = dataclasses.asdict(getattr(self, name))
        elif name == "run":
            payload = {
                k: v for k, v in self.to_dict().items() if k not in _SECTIONS
            }
        else:
            raise KeyError(f"unknown config section {name!r}")
        return _digest(payload)

    def section_hashes(self) -> dict[str, str]:
        hashes = {name: self.section_hash(name) for name in _SECTIONS}
        hashes["run"] = self.section_hash("run")
        hashes["config"] = self.config_hash()
        return hashes

    # -- overrides ---------------------------------------------------------

    def with_overrides(self, **overrides) -> "RunConfig":
        """Apply dotted or top-level overrides, e.g. labeling__theta_bound=0."""
        cfg = self
        for key, value in overrides.items():
            if value is None:
                continue
            if "__" in key:
                section, fname = key.split("__", 1)
                if section not in _SECTIONS:
                    raise ConfigError(f"unknown config section {section!r}")
                sub = replace(getattr(cfg, section), **{fname: value})
                cfg = replace(cfg, **{section: sub})
            else:
                cfg = replace(cfg, **{key: value})
        return cfg


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_jsonable(v) for v in value]
    return value


def _digest(payload) -> str:
    canon = json.dumps(_jsonable(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]


def git_commit_hash() -> str:
    """Short commit id of the working tree, or 'unknown' outside a checkout."""
    try:
        out = subprocess.run(
            ["git", "rev-parse", "--short", "HEAD"],
            capture_output=True, text=True, timeout=5, check=True,
        )
        return out.stdout.strip() or "unknown"
    except Exception:
        return "unknown"
