"""Planar primitives: polygons from parametric boundaries, area and containment.

Every routine has a scalar form operating on a single polygon and a batched
form operating on a stack of polygons with the same vertex count, shaped
``(N, n, 2)``. The batched forms are what the validation loop uses.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class GeometryError(ValueError):
    pass


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (np.isfinite(self.x) and np.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype or float)


class Polygon:
    """Simple polygon with implicitly closed, counter-clockwise vertices."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        v = np.array(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise GeometryError(f"vertices must have shape (n, 2), got {v.shape}")
        if len(v) < 3:
            raise GeometryError(f"a polygon needs at least 3 vertices, got {len(v)}")
        if not np.all(np.isfinite(v)):
            raise GeometryError("polygon vertices must be finite")
        v.setflags(write=False)
        self.vertices = v

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        for x, y in self.vertices:
            yield Point2(float(x), float(y))

    def __repr__(self):
        return f"Polygon(n={len(self)}, area={polygon_area(self):.6g})"

    @property
    def signed_area(self) -> float:
        return float(signed_areas(self.vertices[None])[0])


def _as_vertices(p) -> np.ndarray:
    if isinstance(p, Polygon):
        return p.vertices
    v = np.asarray(p, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise GeometryError("expected a polygon with at least 3 vertices")
    return v


def signed_areas(verts: np.ndarray) -> np.ndarray:
    """Shoelace area of each polygon in a ``(N, n, 2)`` stack; positive if CCW.

    Coordinates are shifted to the first vertex of each polygon before the
    cross products, which keeps the result accurate far from the origin.
    """
    v = verts - verts[:, :1, :]
    x, y = v[..., 0], v[..., 1]
    xn, yn = np.roll(x, -1, axis=1), np.roll(y, -1, axis=1)
    return 0.5 * np.sum(x * yn - xn * y, axis=1)


def polygon_areas(verts: np.ndarray) -> np.ndarray:
    return np.abs(signed_areas(verts))


def polygon_area(p) -> float:
    """Surface area of a polygon in square meters."""
    return abs(float(signed_areas(_as_vertices(p)[None])[0]))


def contains_points(q: np.ndarray, verts: np.ndarray) -> np.ndarray:
    """Boundary-inclusive containment of ``q[i]`` in polygon ``verts[i]``.

    Winding-number test preceded by an exact on-segment test, so points on an
    edge or a vertex count as inside.

    Args:
        q: query points, shape ``(N, 2)``.
        verts: polygons, shape ``(N, n, 2)``.

    Returns:
        Boolean array of shape ``(N,)``.
    """
    q = np.asarray(q, dtype=float)
    a = verts
    b = np.roll(verts, -1, axis=1)
    qx = q[:, 0:1]
    qy = q[:, 1:2]
    ax, ay = a[..., 0], a[..., 1]
    bx, by = b[..., 0], b[..., 1]

    is_left = (bx - ax) * (qy - ay) - (qx - ax) * (by - ay)

    on_edge = (
        (is_left == 0.0)
        & (np.minimum(ax, bx) <= qx) & (qx <= np.maximum(ax, bx))
        & (np.minimum(ay, by) <= qy) & (qy <= np.maximum(ay, by))
    )

    up = (ay <= qy) & (by > qy) & (is_left > 0.0)
    down = (ay > qy) & (by <= qy) & (is_left < 0.0)
    winding = np.sum(up, axis=1) - np.sum(down, axis=1)
    return np.any(on_edge, axis=1) | (winding != 0)


def point_in_polygon(q, p) -> bool:
    """True iff ``q`` is inside ``p`` or on its boundary."""
    v = _as_vertices(p)
    return bool(contains_points(np.asarray(q, dtype=float)[None], v[None])[0])


def boundary_angles(n: int) -> np.ndarray:
    if n < 3:
        raise GeometryError(f"need at least 3 boundary samples, got {n}")
    return 2.0 * np.pi * np.arange(n) / n


def boundary_polygon(f: Callable[[float], object], n: int) -> Polygon:
    """Sample ``f`` at ``n`` evenly spaced angles in [0, 2pi) and close it.

    The vertex order is reversed if the sampled curve runs clockwise. A
    boundary that collapses to zero area (for instance a constant ``f``)
    is rejected.
    """
    phi = boundary_angles(n)
    pts = np.array([np.asarray(f(float(a)), dtype=float) for a in phi])
    if pts.shape != (n, 2):
        raise GeometryError("boundary function must return 2D points")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("boundary function returned non-finite points")
    area = signed_areas(pts[None])[0]
    if area == 0.0:
        raise GeometryError("degenerate boundary: polygon has zero area")
    if area < 0.0:
        pts = pts[::-1].copy()
    return Polygon(pts)


def regular_polygon_area(radius: float, n: int) -> float:
    """Closed-form area of a regular n-gon with circumradius ``radius``."""
    return 0.5 * n * radius**2 * np.sin(2.0 * np.pi / n)
