"""Declarative key-value configuration with flag overrides (flags win)."""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import MalformedInput
from .motifs import DEFAULT_MOTIF_SIZE
from .rewards import DENSE_DENOM_MOTIF, DENSE_DENOM_SEQUENCE, MODE_BLENDED, MODE_GRAPH, MODE_SURFACE


@dataclass(frozen=True)
class Settings:
    mode: str = MODE_GRAPH
    model: str | None = None  # classifier model file
    motifs: str | None = None  # distinctive motif set file
    desired_length: int = 700
    alpha: float = 0.5
    endpoint: str | None = None  # evaluator endpoint URL
    evaluator_model: str = "evaluator"
    temperature: float = 0.0
    timeout: float = 60.0
    max_retries: int = 2
    max_in_flight: int = 8
    port: int = 8400
    host: str = "127.0.0.1"
    k: int = DEFAULT_MOTIF_SIZE
    dense_denominator: str = DENSE_DENOM_SEQUENCE
    blend_weight: float = 0.5

    def __post_init__(self) -> None:
        if self.mode not in (MODE_SURFACE, MODE_GRAPH, MODE_BLENDED):
            raise MalformedInput(f"unknown mode {self.mode!r}")
        if self.dense_denominator not in (DENSE_DENOM_SEQUENCE, DENSE_DENOM_MOTIF):
            raise MalformedInput(f"unknown dense_denominator {self.dense_denominator!r}")


_FIELD_TYPES = {f.name: f.type for f in fields(Settings)}

_INT_FIELDS = {"desired_length", "max_retries", "max_in_flight", "port", "k"}
_FLOAT_FIELDS = {"alpha", "temperature", "timeout", "blend_weight"}


def parse_config_file(path: str | Path) -> dict:
    """Read `key = value` lines; '#' starts a comment; unknown keys are errors."""
    values: dict = {}
    text = Path(path).read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise MalformedInput(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise MalformedInput(f"{path}:{lineno}: unknown configuration key {key!r}")
        values[key] = _coerce(key, raw, f"{path}:{lineno}")
    return values


def _coerce(key: str, raw: str, where: str):
    try:
        if key in _INT_FIELDS:
            return int(raw)
        if key in _FLOAT_FIELDS:
            return float(raw)
    except ValueError as exc:
        raise MalformedInput(f"{where}: bad value for {key!r}: {exc}") from exc
    if raw.lower() in ("none", "null", ""):
        return None
    return raw


def load_settings(config_path: str | Path | None = None, **overrides) -> Settings:
    """Config file first, then keyword overrides (CLI flags) on top."""
    values: dict = {}
    if config_path is not None:
        values.update(parse_config_file(config_path))
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    return Settings(**values)
