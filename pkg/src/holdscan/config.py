"""Run configuration: key=value files, flag overrides and config hashing.

The config file format is one `key = value` pair per line; blank lines
and lines starting with '#' are ignored. Keys match the RunConfig field
names. class_weights is three comma-separated floats. Flags always win
over file values.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Optional, Union

from .classifier import FeatureSpec, TrainConfig
from .compliance import AuditConfig

PathLike = Union[str, Path]


def parse_kv_file(path: PathLike) -> dict[str, str]:
    """Parse a key=value file into raw strings."""
    raw: dict[str, str] = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{line_no}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        raw[key.strip()] = value.strip()
    return raw


@dataclass(frozen=True)
class RunConfig:
    """Merged view of every knob a CLI command may need."""

    seed: Optional[int] = None
    folds: int = 10
    test_fold: int = 0
    split_mode: str = "row"
    # training
    epochs: int = 5
    batch_size: int = 16
    learning_rate: float = 0.1
    weight_decay: float = 0.01
    class_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    # featurization
    hash_dim: int = 2 ** 18
    char_ngram_min: int = 2
    char_ngram_max: int = 4
    word_unigrams: bool = True
    lowercase: bool = True
    max_tokens: int = 128
    # audit windows
    pre_window_ms: int = 15000
    post_window_ms: int = 15000
    grace_ms: int = 2000
    # decision
    threshold: Optional[float] = None
    # synthetic generation
    calls: int = 1000

    def train_config(self) -> TrainConfig:
        if self.seed is None:
            raise ValueError("seed is required for training")
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            weight_decay=self.weight_decay,
            class_weights=tuple(self.class_weights),
            seed=self.seed,
        )

    def feature_spec(self) -> FeatureSpec:
        return FeatureSpec(
            hash_dim=self.hash_dim,
            char_ngram_min=self.char_ngram_min,
            char_ngram_max=self.char_ngram_max,
            word_unigrams=self.word_unigrams,
            lowercase=self.lowercase,
            max_tokens=self.max_tokens,
        )

    def audit_config(self) -> AuditConfig:
        return AuditConfig(
            pre_window_ms=self.pre_window_ms,
            post_window_ms=self.post_window_ms,
            grace_ms=self.grace_ms,
        )


_BOOL_VALUES = {"true": True, "false": False, "1": True, "0": False, "yes": True, "no": False}


def _convert(name: str, value: str, target_type) -> object:
    if name == "class_weights":
        parts = [float(x) for x in value.replace(";", ",").split(",") if x.strip()]
        if len(parts) != 3:
            raise ValueError(f"class_weights needs 3 values, got {len(parts)}")
        return tuple(parts)
    if target_type is bool or name in ("word_unigrams", "lowercase"):
        lowered = value.lower()
        if lowered not in _BOOL_VALUES:
            raise ValueError(f"{name}: expected a boolean, got {value!r}")
        return _BOOL_VALUES[lowered]
    if name in ("threshold", "learning_rate", "weight_decay"):
        return float(value)
    if name == "split_mode":
        return value
    return int(value)


def load_run_config(path: PathLike) -> RunConfig:
    raw = parse_kv_file(path)
    known = {f.name: f.type for f in fields(RunConfig)}
    kwargs = {}
    for key, value in raw.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        kwargs[key] = _convert(key, value, known[key])
    return RunConfig(**kwargs)


def with_overrides(config: RunConfig, **overrides) -> RunConfig:
    """Apply non-None overrides (CLI flags beat file values)."""
    changes = {k: v for k, v in overrides.items() if v is not None}
    if "class_weights" in changes and isinstance(changes["class_weights"], str):
        changes["class_weights"] = _convert("class_weights", changes["class_weights"], tuple)
    return replace(config, **changes)


def config_hash(config: RunConfig) -> str:
    """Short stable digest of the parameter fields (paths excluded by design)."""
    lines = []
    for f in sorted(fields(RunConfig), key=lambda f: f.name):
        value = getattr(config, f.name)
        lines.append(f"{f.name}={value!r}")
    digest = hashlib.sha256("\n".join(lines).encode("utf-8")).hexdigest()
    return digest[:12]
