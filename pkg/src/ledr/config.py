"""Flat key-value experiment configuration.

The format is one dotted ``key=value`` per line, ``#`` starts a comment:

    world_true.kind=sphere
    world_true.r=1.0
    world_model.kind=flat
    world_model.n=2
    x0=1.5707963267948966,0.0
    v0=0.0,1.0
    h=0.001
    steps=2000
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigError, InvalidParameterError
from .geodesic import SCHEMES
from .worlds import WorldPreset, make_world


@dataclass(frozen=True)
class ExperimentConfig:
    world_true: WorldPreset
    world_model: WorldPreset
    x0: np.ndarray
    v0: np.ndarray
    v0_model: np.ndarray
    h: float
    steps: int
    scheme: str = "rk4"
    seed: int = 0
    out_dir: Optional[str] = None
    raw: dict = field(default_factory=dict, repr=False)


def parse_kv(text: str) -> dict:
    """Parse dotted key=value lines into a flat mapping."""
    mapping = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {stripped!r}")
        key, _, value = stripped.partition("=")
        mapping[key.strip()] = value.strip()
    return mapping


def _vector(mapping, key, required=True):
    if key not in mapping:
        if required:
            raise ConfigError(f"missing required field {key!r}", field=key)
        return None
    try:
        return np.array([float(v) for v in mapping[key].split(",")])
    except ValueError:
        raise ConfigError(f"field {key!r} is not a comma-separated number list", field=key)


def _number(mapping, key, cast, default=None):
    if key not in mapping:
        if default is None:
            raise ConfigError(f"missing required field {key!r}", field=key)
        return default
    try:
        return cast(mapping[key])
    except ValueError:
        raise ConfigError(f"field {key!r} is not a valid {cast.__name__}", field=key)


def _world(mapping, prefix):
    kind_key = f"{prefix}.kind"
    if kind_key not in mapping:
        raise ConfigError(f"missing required field {kind_key!r}", field=kind_key)
    kind = mapping[kind_key]
    params = {}
    for name, cast in (("n", int), ("r", float), ("k", float)):
        key = f"{prefix}.{name}"
        if key in mapping:
            params[name] = _number(mapping, key, cast)
    try:
        return make_world(kind, **params)
    except InvalidParameterError as exc:
        raise ConfigError(str(exc), field=kind_key)


def build_config(mapping: dict) -> ExperimentConfig:
    world_true = _world(mapping, "world_true")
    world_model = _world(mapping, "world_model")
    if world_true.dim != world_model.dim:
        raise ConfigError(
            f"worlds disagree in dimension: {world_true.dim} vs {world_model.dim}",
            field="world_model.kind",
        )
    x0 = _vector(mapping, "x0")
    v0 = _vector(mapping, "v0")
    v0_model = _vector(mapping, "v0_model", required=False)
    if v0_model is None:
        v0_model = v0.copy()
    h = _number(mapping, "h", float)
    if not h > 0:
        raise ConfigError(f"field 'h' must be positive, got {h}", field="h")
    steps = _number(mapping, "steps", int)
    if steps < 1:
        raise ConfigError(f"field 'steps' must be >= 1, got {steps}", field="steps")
    scheme = mapping.get("scheme", "rk4")
    if scheme not in SCHEMES:
        raise ConfigError(f"field 'scheme' must be one of {SCHEMES}", field="scheme")
    seed = _number(mapping, "seed", int, default=0)
    for vec, key in ((x0, "x0"), (v0, "v0"), (v0_model, "v0_model")):
        if vec.size != world_true.dim:
            raise ConfigError(
                f"field {key!r} has dimension {vec.size}, worlds have {world_true.dim}",
                field=key,
            )
    return ExperimentConfig(
        world_true=world_true,
        world_model=world_model,
        x0=x0,
        v0=v0,
        v0_model=v0_model,
        h=h,
        steps=steps,
        scheme=scheme,
        seed=seed,
        out_dir=mapping.get("out_dir"),
        raw=dict(mapping),
    )


def load_config(path) -> ExperimentConfig:
    return build_config(parse_kv(Path(path).read_text()))
