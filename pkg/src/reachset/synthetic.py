"""Synthetic trails drawn from known kinematics, with optional outliers.

Targets are sampled uniformly over the true reachable area (or on its
boundary for stress tests), so the optimum of a matching model is known in
closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .ingest import TrailSet
from .models import DEFAULT_N_VERTICES, CappedAccel, ConstantSpeed, TwoSegment, clip_speed
from .validation import ValidationConfig, miss_budget, validate_reference

PITCH = (105.0, 68.0)
GENERATORS = ("constant_speed", "capped_accel", "two_segment")


@dataclass(frozen=True)
class SyntheticSpec:
    generator: str = "constant_speed"
    v_true: float = 8.0
    a_true: float | None = None
    t_inert_true: float | None = None
    n_trails: int = 10_000
    outlier_fraction: float = 0.0
    outlier_offset: float = 5.0
    seed: int = 0
    dt: float = 1.0
    sampling: str = "area"

    def __post_init__(self):
        if self.generator not in GENERATORS:
            raise ValueError(f"unknown generator {self.generator!r}; expected one of {GENERATORS}")
        if self.generator == "capped_accel" and not (self.a_true and self.a_true > 0):
            raise ValueError("capped_accel generator needs a_true > 0")
        if self.generator == "two_segment" and (self.t_inert_true is None or self.t_inert_true < 0):
            raise ValueError("two_segment generator needs t_inert_true >= 0")
        if self.generator == "two_segment" and self.t_inert_true >= self.dt:
            raise ValueError("two_segment generator needs t_inert_true < dt")
        if not self.v_true > 0 or not self.dt > 0 or self.n_trails < 1:
            raise ValueError("v_true, dt and n_trails must be positive")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1)")
        if self.sampling not in ("area", "boundary"):
            raise ValueError("sampling must be 'area' or 'boundary'")

    @property
    def n_outliers(self) -> int:
        return math.floor(self.outlier_fraction * self.n_trails)

    def true_model(self):
        if self.generator == "constant_speed":
            return ConstantSpeed(self.v_true)
        if self.generator == "capped_accel":
            return CappedAccel(self.a_true, self.v_true)
        return TwoSegment(self.t_inert_true, keep_initial=True, v_const=self.v_true)


def _radial_extent(spec: SyntheticSpec, x0, v0, dt, phi):
    """Centre of the true reachable set and its extent along ``phi`` per trail."""
    model = spec.true_model()
    if spec.generator == "constant_speed":
        return x0, spec.v_true * dt
    if spec.generator == "two_segment":
        return model.centers(x0, v0, dt), model.radii(v0, dt)
    center = x0 + clip_speed(v0, spec.v_true) * dt[:, None]
    return center, model.extent_along(v0, dt, phi)


def _sample_angles(spec, rng, x0, v0, dt):
    """Angles with density proportional to r(phi)^2, i.e. uniform over the area."""
    n = len(dt)
    phi = rng.uniform(0.0, 2.0 * math.pi, n)
    if spec.generator != "capped_accel" or spec.sampling == "boundary":
        return phi
    model = spec.true_model()
    r_max = spec.v_true * dt
    todo = np.arange(n)
    while len(todo):
        r = model.extent_along(v0[todo], dt[todo], phi[todo])
        accept = rng.uniform(size=len(todo)) * r_max[todo] ** 2 <= r**2
        todo = todo[~accept]
        phi[todo] = rng.uniform(0.0, 2.0 * math.pi, len(todo))
    return phi


def generate_trails(spec: SyntheticSpec) -> TrailSet:
    """Seeded synthetic trails with exactly ``spec.n_outliers`` outliers."""
    rng = np.random.Generator(np.random.Philox(spec.seed))
    n = spec.n_trails
    dt = np.full(n, float(spec.dt))
    x0 = rng.uniform((0.0, 0.0), PITCH, size=(n, 2))
    heading = rng.uniform(0.0, 2.0 * math.pi, n)
    speed = rng.uniform(0.0, spec.v_true, n)
    v0 = speed[:, None] * np.column_stack([np.cos(heading), np.sin(heading)])

    phi = _sample_angles(spec, rng, x0, v0, dt)
    center, extent = _radial_extent(spec, x0, v0, dt, phi)
    frac = rng.uniform(size=n)
    rho = extent * (np.sqrt(frac) if spec.sampling == "area" else 1.0)

    outliers = rng.permutation(n)[: spec.n_outliers]
    rho = np.asarray(rho, dtype=float).copy()
    rho[outliers] = np.broadcast_to(extent, (n,))[outliers] + spec.outlier_offset

    xt = center + rho[:, None] * np.column_stack([np.cos(phi), np.sin(phi)])
    provenance = {"source": f"synthetic:{spec.generator}", "seed": spec.seed,
                  "dt": spec.dt, "n_trails": n, "n_outliers": spec.n_outliers,
                  "spec": {k: getattr(spec, k) for k in spec.__dataclass_fields__},
                  "outlier_indices": sorted(int(i) for i in outliers)}
    return TrailSet(x0, v0, xt, dt, provenance)


def required_radius(trails: TrailSet, n_vertices: int = DEFAULT_N_VERTICES) -> np.ndarray:
    """Smallest constant-speed ``v_max`` whose n-gon contains each target.

    The polygon has vertices at angles ``2 pi k / n``; along a direction that
    sits at angle ``delta`` from the nearest edge midpoint its boundary lies
    at ``R cos(pi/n) / cos(delta)`` from the centre.
    """
    d = trails.xt - trails.x0
    dist = np.hypot(d[:, 0], d[:, 1])
    theta = np.arctan2(d[:, 1], d[:, 0])
    step = 2.0 * math.pi / n_vertices
    delta = np.mod(theta, step) - step / 2.0
    return dist * np.cos(delta) / math.cos(math.pi / n_vertices) / trails.dt


def analytic_optimum_constant_speed(trails: TrailSet, hit_ratio_min: float,
                                    n_vertices: int = DEFAULT_N_VERTICES):
    """Best constant-speed ``v_max`` and its score, by order statistics.

    The feasible ``v_max`` must cover all but ``miss_budget`` trails, so the
    optimum is the corresponding order statistic of the per-trail required
    radii (nudged up by a relative 1e-12 so rounding cannot push the extreme
    target off the boundary). The score is computed by the reference
    validator without early exit.
    """
    if len(set(np.unique(trails.dt))) != 1:
        raise ValueError("all trails must share the same dt")
    need = np.sort(required_radius(trails, n_vertices))
    k = miss_budget(hit_ratio_min, len(trails))
    v_star = float(need[len(need) - 1 - k]) * (1.0 + 1e-12)
    cfg = ValidationConfig(hit_ratio_min=hit_ratio_min, n_vertices=n_vertices)
    result = validate_reference(ConstantSpeed(v_star), trails, cfg)
    return v_star, result.score
