import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from planck_lab.geometry import (
    CIRCLE, GLOBAL, SPHERE, TORUS, Ball, ball_volume, candidate_centers, exp_map, geodesic_distance,
    geodesic_interpolate, get_manifold, polar_grid, quadrature, reduce_point, to_unit, uniform_sample,
)

MANIFOLDS = [CIRCLE, TORUS, SPHERE]


def points(m):
    if m is CIRCLE:
        return st.tuples(st.floats(0, 2 * math.pi))
    if m is TORUS:
        return st.tuples(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
    return st.tuples(st.floats(0, math.pi), st.floats(0, 2 * math.pi))


def test_manifold_constants():
    assert CIRCLE.total_volume == pytest.approx(2 * math.pi)
    assert TORUS.total_volume == pytest.approx(4 * math.pi**2)
    assert SPHERE.total_volume == pytest.approx(4 * math.pi)
    assert get_manifold("sphere") is SPHERE
    with pytest.raises(ValueError):
        get_manifold("klein")


@pytest.mark.parametrize("m, r, expected", [
    (CIRCLE, 0.3, 0.6),
    (TORUS, 0.3, math.pi * 0.09),
    (SPHERE, 0.3, 2 * math.pi * (1 - math.cos(0.3))),
    (SPHERE, math.pi, 4 * math.pi),
])
def test_ball_volume(m, r, expected):
    assert ball_volume(m, r) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("r", [0.0, -1.0, 3.2])
def test_ball_volume_rejects_bad_radius(r):
    with pytest.raises(ValueError):
        ball_volume(SPHERE, r)


def test_reduce_point_sphere_reflects_theta():
    p = reduce_point(SPHERE, [math.pi + 0.2, 0.5])
    assert p == pytest.approx([math.pi - 0.2, 0.5 + math.pi])
    assert reduce_point(TORUS, [-0.1, 7.0]) == pytest.approx([2 * math.pi - 0.1, 7.0 - 2 * math.pi])
    with pytest.raises(ValueError):
        reduce_point(SPHERE, [1.0])


@pytest.mark.parametrize("m", MANIFOLDS)
def test_distance_axioms(m):
    @given(points(m), points(m), points(m))
    def check(p, q, s):
        d_pq = geodesic_distance(m, p, q)
        assert d_pq == pytest.approx(geodesic_distance(m, q, p), abs=1e-12)
        assert 0.0 <= d_pq <= m.diameter + 1e-12
        assert d_pq <= geodesic_distance(m, p, s) + geodesic_distance(m, s, q) + 1e-12
    check()


@pytest.mark.parametrize("m", MANIFOLDS)
def test_exp_map_moves_by_t(m):
    @given(points(m), st.floats(0.0, 1.5), st.floats(0, 2 * math.pi))
    def check(p, t, psi):
        q = exp_map(m, p, t, psi)
        assert geodesic_distance(m, p, q) == pytest.approx(t, abs=1e-9)
    check()


@pytest.mark.parametrize("m", MANIFOLDS)
def test_geodesic_interpolate(m):
    p = reduce_point(m, [0.4, 1.0][: m.chart_dim])
    q = reduce_point(m, [1.3, 2.1][: m.chart_dim])
    d = geodesic_distance(m, p, q)
    for s in (0.0, 0.25, 0.5, 1.0):
        x = geodesic_interpolate(m, p, q, s)
        assert geodesic_distance(m, p, x) == pytest.approx(s * d, abs=1e-12)


@pytest.mark.parametrize("m", MANIFOLDS)
def test_ball_rule_reproduces_volume(m):
    @given(points(m), st.floats(0.01, 1.5))
    def check(p, r):
        rule = quadrature(m, Ball(p, r))
        assert rule.integrate(np.ones(len(rule))) == pytest.approx(ball_volume(m, r), rel=1e-12)
        assert np.all(geodesic_distance(m, p, rule.nodes) <= r * (1 + 1e-12))
    check()


def test_sphere_cap_of_linear_function():
    # int over B(c, r) of <x, c> = pi sin(r)^2 for any center c
    for c in ([0.0, 0.0], [1.1, 2.0], [math.pi, 0.0]):
        r = 0.7
        rule = quadrature(SPHERE, Ball(tuple(c), r))
        vals = to_unit(rule.nodes) @ to_unit(c)
        assert rule.integrate(vals) == pytest.approx(math.pi * math.sin(r) ** 2, rel=1e-13)


def test_sphere_cap_against_scipy():
    c, r = (0.9, 0.3), 0.5
    f = lambda th, ph: np.cos(3 * th) * np.sin(2 * ph) + th
    rule = quadrature(SPHERE, Ball(c, r), 40, 80)
    ours = rule.integrate(f(rule.nodes[:, 0], rule.nodes[:, 1]))

    def polar(t, psi):
        q = exp_map(SPHERE, c, t, psi)
        return f(q[0], q[1]) * math.sin(t)
    ref, _ = integrate.dblquad(polar, 0, 2 * math.pi, 0, r, epsabs=1e-13, epsrel=1e-12)
    assert ours == pytest.approx(ref, rel=1e-10)


def test_torus_ball_plane_wave_bessel_oracle():
    k = np.array([3.0, 4.0])
    c, r = np.array([1.0, 2.0]), 0.8
    rule = quadrature(TORUS, Ball(tuple(c), r), 48, 96)
    d = np.mod(rule.nodes - c + math.pi, 2 * math.pi) - math.pi
    ours = rule.integrate(np.cos(d @ k))
    kn = float(np.linalg.norm(k))
    assert ours == pytest.approx(2 * math.pi * r * special.j1(kn * r) / kn, rel=1e-12)


@pytest.mark.parametrize("m, f, exact", [
    (CIRCLE, lambda p: np.cos(3 * p[:, 0]) ** 2, math.pi),
    (TORUS, lambda p: np.sin(p[:, 0] + 2 * p[:, 1]) ** 2, 2 * math.pi**2),
    (SPHERE, lambda p: np.cos(p[:, 0]) ** 2, 4 * math.pi / 3),
])
def test_global_rule_exact(m, f, exact):
    rule = quadrature(m, GLOBAL, 8)
    assert rule.integrate(f(rule.nodes)) == pytest.approx(exact, rel=1e-13)


def test_global_requires_order():
    with pytest.raises(ValueError):
        quadrature(SPHERE, GLOBAL)


def test_rule_arrays_read_only():
    rule = quadrature(TORUS, Ball((0.0, 0.0), 0.2))
    with pytest.raises(ValueError):
        rule.weights[0] = 1.0


@pytest.mark.parametrize("m", MANIFOLDS)
@pytest.mark.parametrize("seed", [None, 0, 3])
def test_candidate_centers_cover(m, seed):
    spacing = 0.15
    cands = candidate_centers(m, spacing, seed)
    probes = uniform_sample(m, 3000, 11)
    best = np.full(len(probes), np.inf)
    for c in cands:
        best = np.minimum(best, geodesic_distance(m, probes, c))
    assert best.max() <= spacing


def test_candidate_centers_deterministic():
    a = candidate_centers(SPHERE, 0.2, 5)
    b = candidate_centers(SPHERE, 0.2, 5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, candidate_centers(SPHERE, 0.2, 6))


@pytest.mark.parametrize("m", MANIFOLDS)
def test_polar_grid(m):
    c = [0.3, 0.2][: m.chart_dim]
    pts, t, psi = polar_grid(m, c, 0.4, 0.05)
    assert t[0] == 0.0 and np.allclose(pts[0], reduce_point(m, c))
    assert np.all(geodesic_distance(m, c, pts) <= 0.4 + 1e-12)
