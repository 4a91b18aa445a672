"""Flat key = value run configuration.

Lines are ``key = value``; ``#`` starts a comment.  Unknown keys are errors.
List values are comma separated.  ``window.<record> = lo, hi`` replaces the
pass window of a named record (``none`` leaves a side open).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

SUITES = ("partition", "cm", "kernel", "trilinear", "hardy", "lowerbound")

DEFAULTS: dict[str, object] = {
    "dim": 2,
    "seed": 0,
    "jobs": 1,
    "out": "xbench-out",
    "suites": ",".join(SUITES),
    "partition.points": 10000,
    "partition.k_max": 12,
    "cm.j_min": 4,
    "cm.j_max": 10,
    "cm.A": 16,
    "cm.orders": "0,-1,-1.5",
    "kernel.N": 1024,
    "kernel.X": 8.0,
    "kernel.j_min": 4,
    "kernel.j_max": 7,
    "kernel.angular_j": 6,
    "trilinear.N": 256,
    "trilinear.X": 2 * math.pi,
    "trilinear.j": 4,
    "trilinear.trials": 8,
    "trilinear.oracle_N": 64,
    "trilinear.oracle_X": 16.0,
    "hardy.j_min": 3,
    "hardy.j_max": 7,
    "hardy.atom_X": 8.0,
    "hardy.annulus_j": 4,
    "hardy.annulus_N": 2048,
    "hardy.annulus_X": 176.0,
    "hardy.ball_X": 44.0,
    "lowerbound.j_min": 4,
    "lowerbound.j_max": 7,
    "lowerbound.delta_ratio": 0.125,
    "lowerbound.tail_cut": 64.0,
    "lowerbound.count_j_min": 5,
    "lowerbound.count_j_max": 8,
    "lowerbound.plateau_j": "9,10,11,12",
    "lowerbound.refine_j": 6,
    "lowerbound.khintchine_j": 5,
    "lowerbound.khintchine_trials": 256,
}

# kernel presets that pass the aliasing guard for each dimension
DIM_PRESETS = {
    1: {"kernel.N": 1024, "kernel.X": 8.0},
    2: {},
    3: {"kernel.N": 256, "kernel.X": 8.0, "kernel.j_min": 3, "kernel.j_max": 5},
}


def _coerce(key: str, raw: str):
    proto = DEFAULTS[key]
    try:
        if isinstance(proto, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(proto, int):
            return int(raw)
        if isinstance(proto, float):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
    return raw


def _window(key: str, raw: str) -> tuple[float | None, float | None]:
    parts = [p.strip() for p in raw.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"{key} needs 'lo, hi'")
    try:
        return tuple(None if p.lower() == "none" else float(p) for p in parts)  # type: ignore[return-value]
    except ValueError as exc:
        raise ConfigError(f"bad window for {key}: {raw!r}") from exc


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: dict(DEFAULTS))
    windows: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def get_list(self, key: str, cast=float) -> list:
        return [cast(v) for v in str(self.values[key]).split(",") if v.strip()]

    @property
    def suites(self) -> list[str]:
        return [s.strip() for s in str(self.values["suites"]).split(",") if s.strip()]

    def set(self, key: str, value) -> None:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        self.values[key] = _coerce(key, str(value)) if isinstance(value, str) else value

    def validate(self) -> None:
        for s in self.suites:
            if s not in SUITES:
                raise ConfigError(f"unknown suite {s!r}; expected a subset of {SUITES}")
        if self.values["dim"] not in (1, 2, 3):
            raise ConfigError("dim must be 1, 2 or 3")
        if self.values["jobs"] < 1:
            raise ConfigError("jobs must be at least 1")
        for key in [k for k in DEFAULTS if k.endswith(".j_min")]:
            top = key.replace("j_min", "j_max")
            if self.values[key] > self.values[top]:
                raise ConfigError(f"{key} exceeds {top}")


def parse_config(text: str, base: RunConfig | None = None) -> RunConfig:
    cfg = base if base is not None else RunConfig()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, raw = (p.strip() for p in line.split("=", 1))
        if key.startswith("window."):
            cfg.windows[key[len("window."):]] = _window(key, raw)
        elif key in DEFAULTS:
            cfg.values[key] = _coerce(key, raw)
        else:
            raise ConfigError(f"line {lineno}: unknown config key {key!r}")
    return cfg


def load_config(path: str | Path | None, dim: int | None = None) -> RunConfig:
    """Defaults, then the dimension presets, then the file."""
    cfg = RunConfig()
    text = Path(path).read_text() if path is not None else ""
    probe = parse_config(text)
    use_dim = dim if dim is not None else probe["dim"]
    cfg.values.update(DIM_PRESETS.get(use_dim, {}))
    cfg = parse_config(text, cfg)
    if dim is not None:
        cfg.values["dim"] = dim
    return cfg
