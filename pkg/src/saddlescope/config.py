"""Numerical settings shared by the library and the command line."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

ENV_VAR = "SADDLESCOPE_CONFIG"


@dataclass(frozen=True)
class Config:
    tol: float = 1e-10  # local position tolerance of the trajectory integrator
    delta_saddle: float = 1e-6  # flat distance below which a ray counts as hitting a zero
    hysteresis: float = 10.0  # saddle-free needs every approach above hysteresis * delta_saddle
    chart_radius: float = 10.0  # switch to w = 1/z beyond this radius
    grid: int = 64
    refine_tol: float = 1e-9
    seed: int = 0
    max_step: float = 0.05  # polyline density, in chart units
    max_length: float = 400.0  # euclidean length budget per trajectory
    max_steps: int = 40000
    start_offset: float = 1e-4  # relative offset of ray starting points from their zero
    stop_radius: float = 1e-3  # relative radius at which a ray is declared to reach a pole
    wall_delta: float = 1e-3  # phase offset on either side of a wall

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name != "seed" and not v > 0:
                raise ValueError(f"{f.name} must be positive, got {v!r}")

    def updated(self, **kw) -> "Config":
        return replace(self, **{k: v for k, v in kw.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | os.PathLike | None = None) -> Config:
    """Read a JSON config file; fall back to ``$SADDLESCOPE_CONFIG`` and then defaults."""
    path = path or os.environ.get(ENV_VAR)
    if not path:
        return Config()
    data = json.loads(Path(path).read_text())
    if not isinstance(data, dict):
        raise ValueError("config file must hold a JSON object")
    known = {f.name: f.type for f in fields(Config)}
    unknown = set(data) - set(known)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    cast = {k: (int(v) if k in ("grid", "seed", "max_steps") else float(v)) for k, v in data.items()}
    return Config(**cast)
