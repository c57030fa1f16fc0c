"""Run configuration: plain-text `key = value` files with '#' comments.

Every key has a default; unknown keys are rejected. Command-line flags
override file values, and DEPPARSE_SEED is the last-resort seed default.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field

PARSER_CHOICES = ("transition-standard", "transition-eager", "graph")
POS_MODE_CHOICES = ("gold", "auto", "none")


class ConfigError(ValueError):
    """Unknown key, bad value, or unreadable config file."""


def _default_seed() -> int:
    raw = os.environ.get("DEPPARSE_SEED", "0")
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"DEPPARSE_SEED must be an integer, got {raw!r}") from exc


@dataclass
class RunConfig:
    # data
    train_path: str = ""
    dev_path: str = ""
    test_path: str = ""
    treebanks: tuple[str, ...] = ()  # path prefixes: <prefix>-{train,dev,test}.conllu
    output_dir: str = "runs"
    # model choice
    parser: str = "graph"
    encoder: str = "lookup"  # pluggable slot; only the lookup encoder ships
    pos_mode: str = "gold"
    augment: bool = False
    # dimensions
    word_dim: int = 128
    pos_dim: int = 32
    supertoken_filter_sizes: tuple[int, ...] = (2, 3, 4, 5)
    supertoken_dim: int = 192
    hidden_dim: int = 256
    arc_mlp_dim: int = 256
    label_mlp_dim: int = 64
    # optimization (3e-5 presumes a pretrained encoder; the from-scratch
    # lookup encoder wants 1e-3)
    learning_rate: float = 1e-3
    warmup_ratio: float = 0.1
    weight_decay: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int = 8
    epochs: int = 10
    dropout: float = 0.1
    tagger_batch_size: int = 32
    tagger_epochs: int = 20
    seed: int = field(default_factory=_default_seed)
    # benchmark grid axes
    grid_parsers: tuple[str, ...] = PARSER_CHOICES
    grid_pos_modes: tuple[str, ...] = ("gold", "none")
    grid_augment: tuple[bool, ...] = (False, True)

    def __post_init__(self) -> None:
        if self.parser not in PARSER_CHOICES:
            raise ConfigError(f"parser must be one of {PARSER_CHOICES}, got {self.parser!r}")
        if self.pos_mode not in POS_MODE_CHOICES:
            raise ConfigError(f"pos_mode must be one of {POS_MODE_CHOICES}, got {self.pos_mode!r}")
        for p in self.grid_parsers:
            if p not in PARSER_CHOICES:
                raise ConfigError(f"grid_parsers entry {p!r} invalid")
        for m in self.grid_pos_modes:
            if m not in POS_MODE_CHOICES:
                raise ConfigError(f"grid_pos_modes entry {m!r} invalid")


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _parse_bool(raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {raw!r}")


def _parse_value(name: str, raw: str):
    f = _FIELDS[name]
    base = f.type
    raw = raw.strip()
    try:
        if base == "int":
            return int(raw)
        if base == "float":
            return float(raw)
        if base == "bool":
            return _parse_bool(raw)
        if base == "str":
            return raw
        if base.startswith("tuple[int"):
            return tuple(int(x) for x in raw.split(",") if x.strip()) if raw else ()
        if base.startswith("tuple[bool"):
            return tuple(_parse_bool(x) for x in raw.split(",") if x.strip()) if raw else ()
        if base.startswith("tuple[str"):
            return tuple(x.strip() for x in raw.split(",") if x.strip()) if raw else ()
    except ValueError as exc:
        raise ConfigError(f"config key {name}: {exc}") from exc
    raise ConfigError(f"config key {name}: unsupported field type {base}")


def load_config(path, overrides: dict | None = None) -> RunConfig:
    """Parse a config file; `overrides` (e.g. from CLI flags) win over it."""
    values: dict = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _FIELDS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = _parse_value(key, value)
    if overrides:
        values.update(overrides)
    return RunConfig(**values)


def apply_overrides(cfg: RunConfig, overrides: dict) -> RunConfig:
    unknown = set(overrides) - set(_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return dataclasses.replace(cfg, **overrides)


def save_config(cfg: RunConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for f in dataclasses.fields(RunConfig):
            value = getattr(cfg, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v).lower() if isinstance(v, bool) else str(v) for v in value)
            elif isinstance(value, bool):
                value = str(value).lower()
            fh.write(f"{f.name} = {value}\n")
