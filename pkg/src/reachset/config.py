"""Run defaults and config-file loading (TOML or JSON, chosen by extension)."""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .models import DEFAULT_N_VERTICES, CappedAccel, ConstantAccel, ConstantSpeed, TwoSegment


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Experiment constants: 1 s horizon, 99.975 % minimum hit ratio,
    500 000 sampled trails, 200-vertex polygons."""

    dt: float = 1.0
    hit_ratio_min: float = 0.99975
    n_trails: int = 500_000
    n_vertices: int = DEFAULT_N_VERTICES
    seed: int = 0
    threads: int | None = None
    budget: int = 60
    out: Path = field(default_factory=lambda: Path("."))


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if path.suffix.lower() == ".toml":
            return tomllib.loads(text)
        return json.loads(text)
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None


# illustrative parameters for the boundary overlay figure
FIGURE_MODELS = {
    "(a) constant speed": ConstantSpeed(v_max=8.91),
    "(b) constant acceleration": ConstantAccel(a_max=19.42),
    "(c) capped acceleration": CappedAccel(a_max=19.42, v_max=8.91),
    "(d) two-segment": TwoSegment(t_inert=0.22, keep_initial=True, v_const=6.15),
}
