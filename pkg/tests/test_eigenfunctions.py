import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from planck_lab.acceptance import fd_families, fd_gradient_error
from planck_lab.config import parse_family
from planck_lab.eigenfunctions import (
    circle_mode, constant, density, evaluate, global_sup, gradient, highest_weight, l2_norm, laplacian,
    lattice_points, random_sphere_mode, sup_on_ball, torus_mode, torus_norm_sq, wallis, zonal_harmonic,
)
from planck_lab.geometry import SPHERE, TORUS, uniform_sample


def test_lattice_points():
    pts = lattice_points(25)
    assert pts == [(-5, 0), (-4, -3), (-4, 3), (-3, -4), (-3, 4), (0, -5), (0, 5),
                   (3, -4), (3, 4), (4, -3), (4, 3), (5, 0)]
    assert lattice_points(3) == []
    assert len(lattice_points(625)) == 20


def test_torus_rejects_non_sum_of_squares():
    with pytest.raises(ValueError, match="sum of two squares"):
        torus_mode(3)
    with pytest.raises(ValueError, match="preset"):
        torus_mode(25, "bogus")


def test_torus_norm_combines_opposite_modes():
    # sin(k.x) + sin(-k.x) vanishes identically
    assert torus_norm_sq(np.array([[1, 0], [-1, 0]]), [1.0, 1.0], [0.0, 0.0]) == 0.0
    assert torus_norm_sq(np.array([[1, 0]]), [0.0], [1.0]) == pytest.approx(2 * math.pi**2)


def test_wallis():
    assert wallis(0) == pytest.approx(math.pi)
    assert wallis(1) == pytest.approx(2.0)
    assert wallis(5) == pytest.approx(16 / 15)


@pytest.mark.parametrize("u", [
    circle_mode(7), circle_mode(3, 0.4), torus_mode(25, "full"), torus_mode(65, "random", 4),
    torus_mode(100, "pair"), zonal_harmonic(15), random_sphere_mode(12, 2), constant(SPHERE),
])
def test_unit_l2_norm(u):
    assert l2_norm(u) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("k", [1, 4, 16])
def test_highest_weight_norm_is_exact(k):
    u = highest_weight(k)
    assert l2_norm(u) == pytest.approx(u.l2, rel=1e-12)


def test_frozen_values():
    assert evaluate(zonal_harmonic(10), [0.0, 0.0]) == pytest.approx(1.2927207364566, rel=1e-12)
    assert evaluate(highest_weight(16), [math.pi / 2, math.pi / 32]) == pytest.approx(2.0, rel=1e-15)
    assert evaluate(circle_mode(4), [0.0]) == pytest.approx(1 / math.sqrt(math.pi))
    assert evaluate(constant(TORUS), [1.0, 2.0]) == pytest.approx(1 / (2 * math.pi))


def test_random_mode_seeded():
    a, b = random_sphere_mode(10, 3), random_sphere_mode(10, 3)
    assert np.array_equal(a.data["ccos"], b.data["ccos"])
    assert not np.array_equal(a.data["ccos"], random_sphere_mode(10, 4).data["ccos"])


@pytest.mark.parametrize("u", fd_families(0), ids=lambda u: u.label)
def test_gradient_matches_central_differences(u):
    pts = uniform_sample(u.manifold, 100, 5)
    assert fd_gradient_error(u, pts).max() < 1e-6


@pytest.mark.parametrize("u", [circle_mode(9), torus_mode(25, "random", 1), torus_mode(50, "full")])
def test_analytic_laplacian(u):
    pts = uniform_sample(u.manifold, 50, 0)
    assert np.allclose(laplacian(u, pts), u.eigenvalue_sq * evaluate(u, pts), atol=1e-12 * u.eigenvalue_sq)


@pytest.mark.parametrize("u", [zonal_harmonic(9), random_sphere_mode(7, 1), highest_weight(5)])
def test_sphere_eigen_equation_by_differences(u):
    # -(u_tt + cot t u_t + u_pp / sin^2 t) = lambda^2 u away from the poles
    h = 1e-4
    rng = np.random.default_rng(1)
    for _ in range(10):
        th, ph = rng.uniform(0.3, 2.8), rng.uniform(0, 2 * math.pi)
        f = lambda a, b: evaluate(u, [a, b])
        utt = (f(th + h, ph) - 2 * f(th, ph) + f(th - h, ph)) / h**2
        ut = (f(th + h, ph) - f(th - h, ph)) / (2 * h)
        upp = (f(th, ph + h) - 2 * f(th, ph) + f(th, ph - h)) / h**2
        lap = -(utt + ut / math.tan(th) + upp / math.sin(th) ** 2)
        scale = u.eigenvalue_sq * max(abs(f(th, ph)), 0.1)
        assert abs(lap - u.eigenvalue_sq * f(th, ph)) < 1e-4 * scale


def test_gradient_norm_and_density_consistent():
    u = random_sphere_mode(8, 0)
    pts = uniform_sample(SPHERE, 20, 2)
    g, n = gradient(u, pts)
    assert np.allclose(n**2, density(u, pts, "g2"))
    assert np.allclose(evaluate(u, pts) ** 2, density(u, pts, "u2"))


@given(st.floats(0.05, 1.0), st.floats(0.0, 2 * math.pi))
def test_sup_on_ball_is_tight_lower_bound(r, p):
    u = circle_mode(6)
    s = sup_on_ball("u", u, [p], r)
    assert s <= 1 / math.sqrt(math.pi) + 1e-15
    if r >= math.pi / 6:  # the ball contains a maximum of |cos(6x)|
        assert s == pytest.approx(1 / math.sqrt(math.pi), rel=1e-10)


def test_sup_on_ball_info():
    v, info = sup_on_ball("grad", zonal_harmonic(20), [0.4, 0.1], 0.2, return_info=True)
    assert info["refined"] == v >= info["coarse"]
    assert info["refinement_gain"] >= 0.0


def test_global_sup_zonal_at_pole():
    u = zonal_harmonic(20)
    val, where = global_sup("u", u)
    assert val == pytest.approx(math.sqrt(41 / (4 * math.pi)), rel=1e-12)


@pytest.mark.parametrize("u", [circle_mode(20), circle_mode(3, 0.5), torus_mode(25), torus_mode(25, "random", 7),
                               zonal_harmonic(20), highest_weight(16), random_sphere_mode(5, 2), constant(SPHERE)],
                         ids=lambda u: u.label)
def test_label_round_trip(u):
    v = parse_family(u.label)
    assert v.label == u.label
    pts = uniform_sample(u.manifold, 5, 0)
    assert np.array_equal(evaluate(u, pts), evaluate(v, pts))


def test_sup_on_ball_not_trapped_at_boundary():
    # the best coarse sample sits on the boundary next to a maximum just outside the ball
    s = sup_on_ball("u", circle_mode(6), [4.513671875], 0.84765625)
    assert s == pytest.approx(1 / math.sqrt(math.pi), rel=1e-12)
