import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from planck_lab import kernels
from planck_lab.eigenfunctions import circle_mode, evaluate, torus_mode, zonal_harmonic, random_sphere_mode
from planck_lab.geometry import CIRCLE, SPHERE, TORUS
from planck_lab.packing import (
    SEP_MARGIN, Packing, find_nodal_point, maximal_disjoint_packing, verify_packing,
)


def test_circle_quarter_pi_packing():
    # candidates at spacing R/2 accepted greedily when farther than 2R: 0, 5pi/8, 5pi/4
    pk = maximal_disjoint_packing(CIRCLE, math.pi / 4, None)
    assert pk.J == 3
    assert pk.centers[:, 0] == pytest.approx([0.0, 5 * math.pi / 8, 5 * math.pi / 4])
    chk = verify_packing(pk)
    assert chk["separated"] and chk["covering"] and chk["volume_ok"]


@settings(max_examples=12)
@given(st.sampled_from([CIRCLE, TORUS, SPHERE]), st.floats(0.08, 1.2), st.one_of(st.none(), st.integers(0, 50)))
def test_packing_invariants(m, R, seed):
    pk = maximal_disjoint_packing(m, R, seed)
    chk = verify_packing(pk, 4000, 1)
    assert chk["separated"], chk
    assert chk["covering"], chk
    assert chk["volume_ok"], chk


def test_packing_rejects_large_radius():
    with pytest.raises(ValueError):
        maximal_disjoint_packing(SPHERE, 2.0)


def test_sphere_packing_size():
    pk = maximal_disjoint_packing(SPHERE, 0.1, 0)
    # disjoint caps fill at most the sphere; a 2R-cover needs at least Vol / Vol(B(2R)) caps
    assert 4 * math.pi / (2 * math.pi * (1 - math.cos(0.2))) <= pk.J
    assert pk.J * 2 * math.pi * (1 - math.cos(0.1)) <= 4 * math.pi


@pytest.mark.skipif("cython" not in kernels.BACKENDS, reason="compiled kernels not built")
@pytest.mark.parametrize("m, R", [(CIRCLE, 0.05), (TORUS, 0.2), (SPHERE, 0.15)])
def test_backends_give_same_packing(m, R):
    a = maximal_disjoint_packing(m, R, 2, backend="python")
    b = maximal_disjoint_packing(m, R, 2, backend="cython")
    assert np.array_equal(a.centers, b.centers)


def test_packing_json_round_trip():
    pk = maximal_disjoint_packing(TORUS, 0.4, 3)
    back = Packing.from_json(pk.to_json())
    assert back.manifold is TORUS and back.radius == pk.radius and back.seed == 3
    assert np.array_equal(back.centers, pk.centers)
    assert not pk.centers.flags.writeable


def test_separation_margin_is_tiny():
    assert 0 < SEP_MARGIN <= 1e-10


def test_nodal_point_circle():
    u = circle_mode(10)
    rec = find_nodal_point(u, [0.0], 0.17)
    assert rec.found
    assert rec.point[0] == pytest.approx(math.pi / 20, abs=1e-9)
    assert abs(evaluate(u, rec.point)) <= rec.tolerance
    assert rec.tolerance == pytest.approx(1e-10 / math.sqrt(math.pi))


def test_nodal_point_absent_near_zonal_pole():
    rec = find_nodal_point(zonal_harmonic(20), [0.0, 0.0], 0.05)
    assert not rec.found and rec.point is None
    assert rec.min_abs_sample > 0.5 * rec.sup_abs


@pytest.mark.parametrize("u, c, r", [
    (torus_mode(25, "random", 3), [1.0, 2.0], 0.6),
    (random_sphere_mode(20, 1), [1.2, 0.3], 0.15),
    (zonal_harmonic(30), [0.7, 4.0], 0.1),
])
def test_nodal_point_residual_and_history(u, c, r):
    rec = find_nodal_point(u, c, r)
    assert rec.found
    assert abs(evaluate(u, rec.point)) == pytest.approx(rec.residual) and rec.residual <= rec.tolerance
    assert all(b <= a for a, b in zip(rec.history, rec.history[1:]))


def test_torus_coherent_maximum_needs_larger_radius_factor():
    # the full preset peaks at the origin; its nearest zero is about 2.354/lambda away
    u = torus_mode(25, "full")
    assert not find_nodal_point(u, [0.0, 0.0], 5.0 / u.lam / 3.0).found
    assert find_nodal_point(u, [0.0, 0.0], 7.5 / u.lam / 3.0).found


@pytest.mark.parametrize("R", [1.4, 1.5])
def test_single_cap_packing_is_repaired(R):
    # one 2R-cap leaves an antipodal cap uncovered that no pair of circles bounds
    pk = maximal_disjoint_packing(SPHERE, R, None)
    chk = verify_packing(pk, 20000, 3)
    assert pk.J == 2
    assert chk["separated"] and chk["covering"] and chk["volume_ok"]
