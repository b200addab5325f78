import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from reachset.geometry import contains_points, polygon_area
from reachset.models import (CappedAccel, ConstantAccel, ConstantSpeed, DegenerateReachableSet,
                             KinematicState, ModelError, TwoSegment, capped_accel_boundary,
                             constant_accel_boundary, constant_speed_boundary, model_from_dict,
                             reachable_polygon, two_segment_boundary)

ORIGIN = KinematicState((0.0, 0.0), (0.0, 0.0))


def simulate_capped(x0, v0, a, v_max, t, phi):
    """Accelerate along phi until |v| hits v_max (found by root bracketing), then cruise."""
    v0 = np.asarray(v0, float)
    speed = np.linalg.norm(v0)
    if speed > v_max:
        v0 = v0 * v_max / speed
    u = np.array([math.cos(phi), math.sin(phi)])
    f = lambda s: np.linalg.norm(v0 + a * s * u) - v_max
    # speed is lowest at s_min; the cap is reached on the rising side
    s_min = max(0.0, -float(v0 @ u) / a)
    if f(s_min) >= 0:
        t_cap = s_min
    else:
        hi = s_min + 1.0
        while f(hi) < 0:
            hi *= 2
        t_cap = brentq(f, s_min, hi, xtol=1e-15, rtol=1e-15)
    if t_cap >= t:
        return np.asarray(x0) + v0 * t + 0.5 * a * t * t * u
    v_cap = v0 + a * t_cap * u
    return np.asarray(x0) + v0 * t_cap + 0.5 * a * t_cap**2 * u + v_cap * (t - t_cap)


def radius_by_quadrature(a, v_max, t):
    return quad(lambda s: min(a * s, v_max), 0.0, t, points=[v_max / a])[0]


# frozen from radius_by_quadrature(19.42, 8.91, 1.0)
CAPPED_REST_RADIUS = 6.866022142121524


def test_capped_rest_radius_oracle():
    assert radius_by_quadrature(19.42, 8.91, 1.0) == pytest.approx(CAPPED_REST_RADIUS, abs=1e-12)


def test_constant_speed_boundary_examples():
    np.testing.assert_allclose(constant_speed_boundary(ORIGIN, 1.0, 8.0, 0.0), (8, 0))
    np.testing.assert_allclose(constant_speed_boundary(ORIGIN, 0.5, 8.0, 0.0), (4, 0))
    np.testing.assert_allclose(constant_speed_boundary(ORIGIN, 1.0, 8.0, math.pi), (-8, 0), atol=1e-14)


def test_constant_accel_boundary_examples():
    s = KinematicState((0.0, 0.0), (5.0, 0.0))
    np.testing.assert_allclose(constant_accel_boundary(s, 1.0, 10.0, math.pi), (0, 0), atol=1e-14)
    np.testing.assert_allclose(constant_accel_boundary(ORIGIN, 2.0, 10.0, 0.0), (20, 0))
    p = reachable_polygon(ConstantAccel(10.0), ORIGIN, 1.0)
    np.testing.assert_allclose(np.hypot(*p.vertices.T), 5.0, rtol=1e-12)


def test_capped_accel_rest_examples():
    p = CappedAccel(19.42, 8.91).reachable_polygon(ORIGIN, 1.0)
    np.testing.assert_allclose(np.hypot(*p.vertices.T), CAPPED_REST_RADIUS, atol=1e-9)


def test_capped_accel_at_cap_moves_ballistically_along_heading():
    s = KinematicState((1.0, 2.0), (8.91, 0.0))
    np.testing.assert_allclose(capped_accel_boundary(s, 1.0, 19.42, 8.91, 0.0), (9.91, 2.0), atol=1e-12)


def test_capped_accel_large_accel_limit():
    for phi in np.linspace(0, 2 * np.pi, 17):
        got = capped_accel_boundary(ORIGIN, 1.0, 1e6, 8.91, phi)
        np.testing.assert_allclose(got, 8.91 * np.array([math.cos(phi), math.sin(phi)]), atol=1e-3)


@settings(max_examples=300, deadline=None)
@given(
    st.floats(-50, 50), st.floats(-50, 50),
    st.floats(-14, 14), st.floats(-14, 14),
    st.floats(0.5, 30), st.floats(3, 12), st.floats(0.1, 2.0),
    st.floats(0, 2 * math.pi),
)
def test_capped_accel_matches_simulation(x, y, vx, vy, a, vmax, t, phi):
    s = KinematicState((x, y), (vx, vy))
    got = capped_accel_boundary(s, t, a, vmax, phi)
    np.testing.assert_allclose(got, simulate_capped((x, y), (vx, vy), a, vmax, t, phi), atol=1e-8)


def test_capped_accel_reduces_to_constant_accel():
    rng = np.random.default_rng(3)
    n = 200
    for _ in range(100):
        v0 = rng.uniform(-1, 1, 2)
        v0 *= rng.uniform(0, 15) / max(np.linalg.norm(v0), 1e-12)
        x0 = rng.uniform(-50, 50, 2)
        dt = rng.uniform(0.1, 2)
        a = rng.uniform(0.5, 25)
        c = CappedAccel(a, 1e6).polygons(x0, v0, dt, n)
        b = ConstantAccel(a).polygons(x0, v0, dt, n)
        assert np.max(np.abs(c - b)) < 1e-6


def test_two_segment_examples():
    s = KinematicState((0.0, 0.0), (5.0, 0.0))
    m = TwoSegment(0.22, keep_initial=True, v_const=7.0)
    poly = m.reachable_polygon(s, 1.0)
    center = poly.vertices.mean(axis=0)
    np.testing.assert_allclose(center, (1.1, 0.0), atol=1e-12)
    np.testing.assert_allclose(np.hypot(*(poly.vertices - (1.1, 0.0)).T), 7 * 0.78, rtol=1e-12)

    m0 = TwoSegment(0.0, keep_initial=True, v_const=7.0)
    np.testing.assert_allclose(m0.reachable_polygon(s, 1.0).vertices,
                               ConstantSpeed(7.0).reachable_polygon(s, 1.0).vertices, atol=1e-12)

    still = TwoSegment(0.3, keep_initial=True, a_max=10.0, v_max=8.0)
    p = still.reachable_polygon(ORIGIN, 1.0)
    np.testing.assert_allclose(np.hypot(*p.vertices.T), 3.0 * 0.7, rtol=1e-12)


def test_two_segment_final_speed_variants():
    s = KinematicState((0.0, 0.0), (5.0, 0.0))
    limited = TwoSegment(0.2, keep_initial=True, a_max=10.0, v_max=6.0)
    assert limited.speeds(np.array([[5.0, 0.0]]))[1][0] == 6.0
    not_capped = TwoSegment(0.2, keep_initial=False, v_const=3.0, a_max=10.0, v_max=9.0)
    assert not_capped.speeds(np.array([[5.0, 0.0]]))[1][0] == pytest.approx(5.0)
    p = not_capped.boundary_point(s, 1.0, 0.0)
    np.testing.assert_allclose(p, (3.0 * 0.2 + 5.0 * 0.8, 0.0))


def test_two_segment_degenerate_horizon():
    m = TwoSegment(2.0, keep_initial=True, v_const=5.0)
    s = KinematicState((0.0, 0.0), (5.0, 0.0))
    with pytest.raises(DegenerateReachableSet):
        m.reachable_polygon(s, 1.0)
    with pytest.raises(DegenerateReachableSet):
        two_segment_boundary(s, 1.0, m, 0.0)


@pytest.mark.parametrize("kwargs", [
    dict(t_inert=-0.1, keep_initial=True, v_const=5.0),
    dict(t_inert=0.2, keep_initial=True, v_const=5.0, a_max=3.0),
    dict(t_inert=0.2, keep_initial=False),
    dict(t_inert=0.2, keep_initial=True, v_const=-1.0),
])
def test_two_segment_invalid_params(kwargs):
    with pytest.raises(ModelError):
        TwoSegment(**kwargs)


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_nonpositive_magnitudes_rejected(bad):
    with pytest.raises(ModelError):
        ConstantSpeed(bad)
    with pytest.raises(ModelError):
        CappedAccel(10.0, bad)


def test_model_from_dict_round_trip():
    for m in [ConstantSpeed(8.0), ConstantAccel(4.0), CappedAccel(19.42, 8.91),
              TwoSegment(0.22, True, a_max=10.0, v_max=8.0), TwoSegment(0.1, False, v_const=6.0)]:
        assert model_from_dict(m.to_dict()) == m
    with pytest.raises(ModelError):
        model_from_dict({"model": "teleport"})
    with pytest.raises(ModelError):
        model_from_dict({"model": "constant_speed", "v_max": 8, "colour": "red"})


def random_model(rng):
    kind = rng.integers(4)
    if kind == 0:
        return ConstantSpeed(rng.uniform(2, 12))
    if kind == 1:
        return ConstantAccel(rng.uniform(2, 30))
    if kind == 2:
        return CappedAccel(rng.uniform(2, 30), rng.uniform(3, 12))
    if rng.random() < 0.5:
        return TwoSegment(rng.uniform(0, 0.8), bool(rng.integers(2)), v_const=rng.uniform(2, 10))
    return TwoSegment(rng.uniform(0, 0.8), bool(rng.integers(2)), v_const=rng.uniform(2, 10),
                      a_max=rng.uniform(2, 30), v_max=rng.uniform(3, 12))


def analytic_member(model, x0, v0, dt, q):
    """Exact membership of q in the continuous reachable set."""
    if isinstance(model, ConstantSpeed):
        return np.linalg.norm(q - x0) <= model.v_max * dt, x0, model.v_max * dt
    if isinstance(model, ConstantAccel):
        c = x0 + v0 * dt
        r = 0.5 * model.a_max * dt**2
        return np.linalg.norm(q - c) <= r, c, r
    if isinstance(model, TwoSegment):
        c = model.centers(x0[None], v0[None], np.array([dt]))[0]
        r = model.radii(v0[None], np.array([dt]))[0]
        return np.linalg.norm(q - c) <= r, c, r
    speed = np.linalg.norm(v0)
    v0c = v0 * min(1.0, model.v_max / speed) if speed > 0 else v0
    c = x0 + v0c * dt
    d = q - c
    phi = math.atan2(d[1], d[0])
    r = np.linalg.norm(simulate_capped(x0, v0, model.a_max, model.v_max, dt, phi) - c)
    return np.linalg.norm(d) <= r, c, model.v_max * dt


def test_polygon_membership_matches_analytic_sets():
    rng = np.random.default_rng(11)
    n = 200
    for _ in range(40):
        model = random_model(rng)
        x0 = rng.uniform(0, 100, 2)
        v0 = rng.uniform(-1, 1, 2) * rng.uniform(0, 10)
        dt = rng.uniform(0.9, 2.0)
        poly = model.polygons(x0, v0, dt, n)[0]
        assert polygon_area(poly) > 0
        qs = x0 + v0 * dt + rng.uniform(-25, 25, size=(25, 2))
        got = contains_points(qs, np.broadcast_to(poly, (len(qs), n, 2)))
        for q, g in zip(qs, got):
            inside, c, r = analytic_member(model, x0, v0, dt, q)
            sagitta = r * (1 - math.cos(math.pi / n)) + 1e-9
            dist = np.linalg.norm(q - c)
            if isinstance(model, CappedAccel):
                # polar comparison against the exact radial extent along q's direction
                phi = math.atan2(*(q - c)[::-1])
                rad = np.linalg.norm(simulate_capped(x0, v0, model.a_max, model.v_max, dt, phi) - c)
                if abs(dist - rad) <= sagitta + 0.02 * rad:
                    continue
            elif abs(dist - r) <= sagitta:
                continue
            assert g == inside


def test_disk_models_are_regular_and_ccw():
    rng = np.random.default_rng(8)
    for _ in range(50):
        model = random_model(rng)
        if isinstance(model, CappedAccel):
            continue
        x0 = rng.uniform(0, 100, 2)
        v0 = rng.uniform(-6, 6, 2)
        poly = model.polygons(x0, v0, 1.0, 200)[0]
        center = poly.mean(axis=0)
        radii = np.hypot(*(poly - center).T)
        np.testing.assert_allclose(radii, radii[0], rtol=1e-12)
        assert contains_points(center[None], poly[None])[0]


def test_capped_polygon_star_shaped_and_contains_center():
    rng = np.random.default_rng(9)
    for _ in range(50):
        m = CappedAccel(rng.uniform(1, 30), rng.uniform(4, 12))
        x0 = rng.uniform(0, 100, 2)
        v0 = rng.uniform(-10, 10, 2)
        poly = m.polygons(x0, v0, 1.0, 200)[0]
        from reachset.models import clip_speed
        c = x0 + clip_speed(v0[None], m.v_max)[0]
        d = poly - c
        moved = np.hypot(*d.T) > 1e-12
        # vertex k sits on the ray at angle 2 pi k / n from the centre; directions
        # that cannot gain speed collapse onto the centre itself
        phi = 2 * np.pi * np.arange(200) / 200
        u = np.column_stack([np.cos(phi), np.sin(phi)])
        r = np.hypot(*d.T)
        np.testing.assert_allclose(d[moved], r[moved, None] * u[moved], atol=1e-9)
        assert moved.sum() >= 100
        assert contains_points(c[None], poly[None])[0]
