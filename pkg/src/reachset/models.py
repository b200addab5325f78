"""Parametric motion models mapping a kinematic state to a reachable polygon.

Each model exposes ``boundary(x0, v0, dt, phi)``, which evaluates the boundary
of its reachable set at the angles ``phi`` for a whole batch of states at
once. Shapes: ``x0`` and ``v0`` are ``(N, 2)``, ``dt`` is ``(N,)`` and ``phi``
is ``(n,)``; the result is ``(N, n, 2)``. Scalar helpers build on top of it.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields
from typing import ClassVar

import numpy as np

from .geometry import Polygon, boundary_angles

DEFAULT_N_VERTICES = 200

# below this speed the direction of v0 is treated as undefined
ZERO_SPEED = 1e-9


class ModelError(ValueError):
    pass


class DegenerateReachableSet(ModelError):
    pass


@dataclass(frozen=True)
class KinematicState:
    x0: tuple[float, float]
    v0: tuple[float, float]

    def __post_init__(self):
        if not np.all(np.isfinite(np.r_[self.x0, self.v0])):
            raise ModelError("kinematic state must be finite")


def _positive(name, value):
    if value is None or not math.isfinite(value) or value <= 0:
        raise ModelError(f"{name} must be a positive finite number, got {value!r}")


def _unit(phi):
    return np.stack([np.cos(phi), np.sin(phi)], axis=-1)


class MotionModel:
    """Base class; subclasses are frozen dataclasses holding the parameters."""

    name: ClassVar[str]

    def boundary(self, x0, v0, dt, phi) -> np.ndarray:
        raise NotImplementedError

    def valid_horizon(self, dt) -> np.ndarray:
        """Mask of horizons for which the model makes a non-degenerate prediction."""
        return np.asarray(dt, dtype=float) > 0

    def polygons(self, x0, v0, dt, n_vertices: int = DEFAULT_N_VERTICES) -> np.ndarray:
        x0 = np.atleast_2d(np.asarray(x0, dtype=float))
        v0 = np.atleast_2d(np.asarray(v0, dtype=float))
        dt = np.broadcast_to(np.asarray(dt, dtype=float), (len(x0),))
        return self.boundary(x0, v0, dt, boundary_angles(n_vertices))

    def reachable_polygon(self, state: KinematicState, dt: float,
                          n_vertices: int = DEFAULT_N_VERTICES) -> Polygon:
        if not dt > 0:
            raise ModelError(f"dt must be positive, got {dt}")
        if not self.valid_horizon(dt):
            raise DegenerateReachableSet(
                f"degenerate reachable set (point): {self} at dt={dt}")
        return Polygon(self.polygons(state.x0, state.v0, dt, n_vertices)[0])

    def boundary_point(self, state: KinematicState, dt: float, phi: float) -> np.ndarray:
        return self.boundary(np.atleast_2d(state.x0).astype(float),
                             np.atleast_2d(state.v0).astype(float),
                             np.array([dt], dtype=float),
                             np.array([phi], dtype=float))[0, 0]

    def to_dict(self) -> dict:
        return {"model": self.name,
                **{k: v for k, v in asdict(self).items() if v is not None}}

    @property
    def n_params(self) -> int:
        return sum(1 for f in fields(self) if getattr(self, f.name) is not None)


@dataclass(frozen=True)
class ConstantSpeed(MotionModel):
    """Disk of radius ``v_max * dt`` around the start position."""

    v_max: float
    name: ClassVar[str] = "constant_speed"

    def __post_init__(self):
        _positive("v_max", self.v_max)

    def boundary(self, x0, v0, dt, phi):
        r = self.v_max * dt
        return x0[:, None, :] + r[:, None, None] * _unit(phi)[None]


@dataclass(frozen=True)
class ConstantAccel(MotionModel):
    """Disk of radius ``a_max * dt**2 / 2`` around ``x0 + v0 * dt``."""

    a_max: float
    name: ClassVar[str] = "constant_accel"

    def __post_init__(self):
        _positive("a_max", self.a_max)

    def boundary(self, x0, v0, dt, phi):
        center = x0 + v0 * dt[:, None]
        r = 0.5 * self.a_max * dt**2
        return center[:, None, :] + r[:, None, None] * _unit(phi)[None]


def clip_speed(v0: np.ndarray, v_max: float) -> np.ndarray:
    speed = np.linalg.norm(v0, axis=-1, keepdims=True)
    scale = np.where(speed > v_max, v_max / np.where(speed > 0, speed, 1.0), 1.0)
    return v0 * scale


def time_to_cap(v0_clipped, u, a_max, v_max):
    """Non-negative time for ``|v0 + a_max t u|`` to reach ``v_max``.

    Root of ``a^2 t^2 + 2a (v0.u) t + |v0|^2 - v_max^2 = 0``; requires
    ``|v0| <= v_max``. Shapes: ``v0_clipped`` ``(N, 2)``, ``u`` ``(n, 2)``.
    """
    proj = v0_clipped @ u.T
    speed2 = np.sum(v0_clipped**2, axis=-1, keepdims=True)
    disc = np.maximum(proj**2 + v_max**2 - speed2, 0.0)
    return np.maximum((-proj + np.sqrt(disc)) / a_max, 0.0)


@dataclass(frozen=True)
class CappedAccel(MotionModel):
    """Constant acceleration until ``v_max`` is reached, then constant speed.

    The reachable set is star-shaped around ``x0 + v0* dt`` where ``v0*`` is
    the initial velocity clipped to ``v_max``.
    """

    a_max: float
    v_max: float
    name: ClassVar[str] = "capped_accel"

    def __post_init__(self):
        _positive("a_max", self.a_max)
        _positive("v_max", self.v_max)

    def boundary(self, x0, v0, dt, phi):
        u = _unit(phi)
        v0c = clip_speed(v0, self.v_max)
        t_acc = np.minimum(time_to_cap(v0c, u, self.a_max, self.v_max), dt[:, None])
        r = self.a_max * t_acc * (dt[:, None] - 0.5 * t_acc)
        center = x0 + v0c * dt[:, None]
        return center[:, None, :] + r[..., None] * u[None]

    def extent_along(self, v0, dt, phi):
        """Distance from ``x0 + v0* dt`` to the boundary along ``phi[i]`` for trail ``i``."""
        v0c = clip_speed(np.asarray(v0, dtype=float), self.v_max)
        u = _unit(np.asarray(phi, dtype=float))
        proj = np.sum(v0c * u, axis=-1)
        disc = np.maximum(proj**2 + self.v_max**2 - np.sum(v0c**2, axis=-1), 0.0)
        t_acc = np.minimum(np.maximum((-proj + np.sqrt(disc)) / self.a_max, 0.0), dt)
        return self.a_max * t_acc * (dt - 0.5 * t_acc)


@dataclass(frozen=True)
class TwoSegment(MotionModel):
    """Inertial straight segment along ``v0``, then constant speed in any direction.

    ``v_const`` sets the inertial speed when ``keep_initial`` is false and the
    final speed when ``a_max``/``v_max`` are unset. With both set, the final
    speed is ``min(v_inert + a_max * t_inert, v_max)``.
    """

    t_inert: float
    keep_initial: bool
    v_const: float | None = None
    a_max: float | None = None
    v_max: float | None = None
    name: ClassVar[str] = "two_segment"

    def __post_init__(self):
        if not (math.isfinite(self.t_inert) and self.t_inert >= 0):
            raise ModelError(f"t_inert must be >= 0, got {self.t_inert!r}")
        if (self.a_max is None) != (self.v_max is None):
            raise ModelError("a_max and v_max must be set together or not at all")
        if self.limited:
            _positive("a_max", self.a_max)
            _positive("v_max", self.v_max)
        if not self.keep_initial or not self.limited:
            _positive("v_const", self.v_const)
        elif self.v_const is not None:
            _positive("v_const", self.v_const)

    @property
    def limited(self) -> bool:
        return self.a_max is not None

    def valid_horizon(self, dt):
        return np.asarray(dt, dtype=float) > self.t_inert

    def speeds(self, v0):
        """Inertial and final speed for each initial velocity in ``v0``."""
        speed = np.linalg.norm(v0, axis=-1)
        v_inert = speed if self.keep_initial else np.full_like(speed, self.v_const)
        if self.limited:
            v_final = np.minimum(v_inert + self.a_max * self.t_inert, self.v_max)
        else:
            v_final = np.full_like(speed, self.v_const)
        return v_inert, v_final

    def centers(self, x0, v0, dt):
        speed = np.linalg.norm(v0, axis=-1)
        moving = speed >= ZERO_SPEED
        heading = np.where(moving[:, None], v0 / np.where(moving, speed, 1.0)[:, None], 0.0)
        v_inert, _ = self.speeds(v0)
        t_star = np.minimum(self.t_inert, dt)
        return x0 + (v_inert * t_star)[:, None] * heading

    def radii(self, v0, dt):
        _, v_final = self.speeds(v0)
        return v_final * (dt - np.minimum(self.t_inert, dt))

    def boundary(self, x0, v0, dt, phi):
        center = self.centers(x0, v0, dt)
        r = self.radii(v0, dt)
        return center[:, None, :] + r[:, None, None] * _unit(phi)[None]


MODELS: dict[str, type[MotionModel]] = {
    cls.name: cls for cls in (ConstantSpeed, ConstantAccel, CappedAccel, TwoSegment)
}


def model_from_dict(cfg: dict) -> MotionModel:
    """Build a model from a config block such as ``{"model": "constant_speed", "v_max": 8}``."""
    cfg = dict(cfg)
    try:
        name = cfg.pop("model")
    except KeyError:
        raise ModelError("model config needs a 'model' field") from None
    try:
        cls = MODELS[name]
    except KeyError:
        raise ModelError(f"unknown model {name!r}; expected one of {sorted(MODELS)}") from None
    known = {f.name for f in fields(cls)}
    unknown = set(cfg) - known
    if unknown:
        raise ModelError(f"unknown field(s) for {name}: {sorted(unknown)}")
    try:
        return cls(**cfg)
    except TypeError as exc:
        raise ModelError(f"invalid {name} config: {exc}") from None


def reachable_polygon(model: MotionModel, state: KinematicState, dt: float,
                      n_vertices: int = DEFAULT_N_VERTICES) -> Polygon:
    return model.reachable_polygon(state, dt, n_vertices)


def constant_speed_boundary(state: KinematicState, dt, v_max, phi):
    return ConstantSpeed(v_max).boundary_point(state, dt, phi)


def constant_accel_boundary(state: KinematicState, dt, a_max, phi):
    return ConstantAccel(a_max).boundary_point(state, dt, phi)


def capped_accel_boundary(state: KinematicState, dt, a_max, v_max, phi):
    return CappedAccel(a_max, v_max).boundary_point(state, dt, phi)


def two_segment_boundary(state: KinematicState, dt, params: TwoSegment, phi):
    if not params.valid_horizon(dt):
        raise DegenerateReachableSet(
            f"degenerate reachable set (point): t_inert={params.t_inert} >= dt={dt}")
    return params.boundary_point(state, dt, phi)
