import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from saddlescope.config import Config
from saddlescope.differentials import (
    DegeneratePolarType,
    Inconclusive,
    InvalidDifferential,
    NonSimpleZero,
    OddOrderPole,
    QuadraticDifferential as Q,
    UnsupportedDifferential,
    accumulates_at,
    critical_points,
    find_closed_trajectory,
    horizontality_residual,
    is_saddle_free,
    residue,
    residue_monodromy_demo,
    residue_signs,
    residues,
    saddle_phase_scan,
    standard_periods,
    strip_decomposition,
    wall_cross_check,
    wkb_signed,
    wkb_triangulation,
    zero_ray_directions,
)
from saddlescope.quivers import quiver
from saddlescope.surfaces import arc_count

CUBIC = Q((-1, 0, 0, 1), (), 0.1)
QUARTIC = Q((0.3 + 0.1j, -0.2, 0.5j, 0.1, 1), (), 0.1)
Z2 = Q((1, 0, 1), (), 0.1)
ANNULUS = Q((1, 0.6 + 0.8j, 1), ((0, 3),), 0.3)
EGG = Q((0.7 + 0.2j, 0.4 - 0.3j, 1), ((0, 2),), 0.3)


def close_sets(a, b, tol):
    a, b = list(a), list(b)
    if len(a) != len(b):
        return False
    for x in a:
        j = min(range(len(b)), key=lambda k: abs(b[k] - x))
        if abs(b[j] - x) > tol:
            return False
        b.pop(j)
    return True


# -- construction and critical points -------------------------------------------------------


def test_validation():
    with pytest.raises(InvalidDifferential):
        Q((0, 0))
    with pytest.raises(InvalidDifferential):
        Q((1,), ((0, 2), (0, 3)))
    with pytest.raises(InvalidDifferential):
        Q((1,), ((0, 0),))
    with pytest.raises(InvalidDifferential):
        Q((float("nan"), 1))


def test_trailing_zeros_are_dropped():
    assert Q((1, 0, 1, 0, 0)).numerator == (1, 0, 1)


def test_critical_points_of_z():
    rep = critical_points(Q((0, 1)))
    assert rep.hat_rank == 0
    assert rep.infinity_order == 5
    assert np.allclose(rep.zeros, [0])
    assert rep.polar_type == (5,)


@pytest.mark.parametrize("phi, n", [(CUBIC, 2), (QUARTIC, 3), (Z2, 1), (ANNULUS, 2), (EGG, 2)])
def test_hat_rank(phi, n):
    assert critical_points(phi).hat_rank == n


def test_excluded_polar_types():
    with pytest.raises(DegeneratePolarType):
        critical_points(Q((1,), ((0, 2),)))
    with pytest.raises(DegeneratePolarType):
        critical_points(Q((1,)))


def test_non_simple_zero():
    with pytest.raises(NonSimpleZero):
        critical_points(Q((1, -2, 1)))


def test_zero_at_infinity_is_unsupported():
    with pytest.raises(UnsupportedDifferential):
        critical_points(Q((1,), ((0, 3), (1, 3))))


def test_zero_ray_directions():
    dirs = zero_ray_directions(Q((0, 1)), 0)
    assert np.allclose(dirs, [1, cmath.exp(2j * math.pi / 3), cmath.exp(4j * math.pi / 3)])
    shifted = zero_ray_directions(Q((0, 1), (), 2.0), 0)
    assert close_sets(shifted, dirs, 1e-12)


@settings(max_examples=30)
@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=3), st.floats(0, 1))
def test_zero_ray_directions_are_horizontal(a, theta):
    # near a simple zero phi ~ (z - a) R'(a), and each ray satisfies Im(exp(-i pi theta) sqrt(phi) dz) = 0
    phi = Q((-a * a, 0, 1), (), theta)
    d = 2 * a
    for u in zero_ray_directions(phi, a):
        v = cmath.exp(-1j * math.pi * theta) * cmath.sqrt(d * u) * u
        assert abs(v.imag) < 1e-9 * abs(v)


# -- residues ---------------------------------------------------------------------------


def test_egg_residues():
    c, b = 0.7 + 0.2j, 0.4 - 0.3j
    r = residues(Q((c, b, 1), ((0, 2),)))
    assert min(abs(r["P0"] - s * 4j * math.pi * cmath.sqrt(c)) for s in (1, -1)) < 1e-9
    assert min(abs(r["inf"] - s * 2j * math.pi * b) for s in (1, -1)) < 1e-9


def test_residue_at_odd_pole_raises():
    with pytest.raises(OddOrderPole):
        residue(CUBIC, "inf")


def test_residue_signs_flip_across_the_pop_phase():
    th = (cmath.phase(residue(EGG, "P0")) / math.pi) % 1
    assert residue_signs(EGG, th - 0.01)["P0"] == 1
    assert residue_signs(EGG, th + 0.01)["P0"] == -1


def test_monodromy_demo_one_and_two_loops():
    one = residue_monodromy_demo(1)
    assert abs(one["residue_end"] + one["residue_start"]) < 1e-9
    assert abs(one["shift"] - one["shift_residue"]) < 1e-6
    two = residue_monodromy_demo(2)
    assert abs(two["residue_end"] - two["residue_start"]) < 1e-9
    assert "sign flipped: True" in one["transcript"]


# -- saddle freeness and strips ------------------------------------------------------------


def test_saddle_detection():
    assert is_saddle_free(CUBIC.with_theta(0.0))[0] is False
    assert is_saddle_free(CUBIC)[0] is True


def test_budget_exhaustion_is_inconclusive():
    with pytest.raises(Inconclusive):
        is_saddle_free(CUBIC, Config(max_length=0.5))


@pytest.mark.parametrize("phi, strips, halves", [(CUBIC, 2, 5), (QUARTIC, 3, 6), (Z2, 1, 4), (ANNULUS, 2, 2)])
def test_strip_counts(phi, strips, halves):
    dec = strip_decomposition(phi, generic=False)
    assert len(dec.strips) == strips
    assert len(dec.half_planes) == halves


def test_z2_plus_one_period():
    (p,) = standard_periods(Z2).values()
    assert abs(p - math.pi * 1j) < 1e-9


def test_strip_periods_lie_in_the_upper_half_plane():
    for phi in (CUBIC, QUARTIC, ANNULUS, EGG):
        rot = cmath.exp(-1j * math.pi * phi.theta)
        assert all((rot * z).imag > 0 for z in standard_periods(phi).values())


def test_separatrix_ends_cluster_at_poles():
    # a pole of order m >= 3 receives separatrices from m - 2 directions
    for phi in (CUBIC, QUARTIC, ANNULUS):
        dec = strip_decomposition(phi, generic=False)
        ends = {r.end.label for r in dec.rays.values()}
        for name, m in phi.pole_orders().items():
            if m >= 3:
                assert {e for e in ends if e.split(":")[0] == name} == {f"{name}:{j}" for j in range(m - 2)}


@pytest.mark.parametrize("phi", [Z2, CUBIC, ANNULUS, EGG])
def test_traced_trajectories_are_horizontal(phi):
    dec = strip_decomposition(phi)
    trajs = list(dec.rays.values()) + [s.generic for s in dec.strips] + [h.generic for h in dec.half_planes]
    assert max(horizontality_residual(phi, t) for t in trajs) <= 1e-6


def test_period_quadrature_converges():
    for phi in (CUBIC, ANNULUS):
        a = strip_decomposition(phi, generic=False, nodes=10).periods()
        b = strip_decomposition(phi, generic=False, nodes=20).periods()
        assert all(abs(a[k] - b[k]) < 1e-9 for k in a)


def test_periods_are_constant_within_a_chamber():
    a = standard_periods(CUBIC.with_theta(0.10))
    b = standard_periods(CUBIC.with_theta(0.12))
    assert close_sets(a.values(), b.values(), 1e-8)


@pytest.mark.parametrize("s", [0.05, 0.3, 0.5])
def test_rotation_equivariance(s):
    # rotating phi by exp(2 pi i s) and theta by s keeps the foliation and rotates periods by exp(i pi s)
    rot = cmath.exp(2j * math.pi * s)
    for phi in (CUBIC, ANNULUS):
        psi = Q(tuple(rot * c for c in phi.numerator), phi.poles, phi.theta + s)
        a, b = strip_decomposition(phi, generic=False), strip_decomposition(psi, generic=False)
        assert len(a.strips) == len(b.strips)
        assert close_sets([cmath.exp(1j * math.pi * s) * z for z in a.periods().values()], b.periods().values(), 1e-8)


def test_simple_poles_have_no_strip_decomposition():
    with pytest.raises(UnsupportedDifferential):
        strip_decomposition(Q((1, 0, 0, 1), ((0, 1),), 0.1))


# -- WKB triangulations ------------------------------------------------------------------


@pytest.mark.parametrize("phi", [CUBIC, QUARTIC, ANNULUS, EGG])
def test_wkb_triangulation_shape(phi):
    t, strips = wkb_triangulation(phi)
    assert len(t.arcs) == arc_count(t.surface) == critical_points(phi).hat_rank
    assert set(strips) == set(t.arcs)


def test_annulus_wkb_quiver_is_kronecker():
    t, _ = wkb_triangulation(ANNULUS)
    assert abs(quiver(t).matrix).max() == 2


def test_egg_self_folded_side():
    st0, _ = wkb_signed(EGG.with_theta(0.55))
    assert st0.triangulation.self_folded_pairs() == [("a0", "a1", "P0")]
    assert st0.sign["P0"] == -1
    for th in (0.05, 0.25, 0.45):
        st1, _ = wkb_signed(EGG.with_theta(th))
        assert st1.triangulation.self_folded_pairs() == []
        assert st1.sign["P0"] == 1


# -- walls --------------------------------------------------------------------------------


def test_scan_z2_plus_one():
    res = saddle_phase_scan(Z2, grid=16)
    assert len(res) == 1
    assert abs(res.walls[0].theta - 0.5) < 1e-8
    assert res.walls[0].kind == "flip"


def test_scan_z2_plus_i():
    res = saddle_phase_scan(Q((1j, 0, 1)), grid=16)
    assert len(res) == 1
    th = res.walls[0].theta
    assert min(th, 1 - th) < 1e-8


def test_wall_period_points_along_the_phase():
    w = saddle_phase_scan(Z2, grid=16).walls[0]
    assert abs(cmath.phase(w.period) / math.pi - w.theta) < 1e-7


def test_annulus_flip_wall_cross_check():
    w = wall_cross_check(ANNULUS, 0.60906806)
    assert w.kind == "flip"
    assert w.residual <= 1e-6


def test_egg_pop_wall_cross_check():
    th = (cmath.phase(residue(EGG, "P0")) / math.pi) % 1
    w = wall_cross_check(EGG, th)
    assert w.kind == "pop" and w.pole == "P0"
    assert w.residual <= 1e-6


class _W:
    def __init__(self, theta):
        self.theta = theta


def test_accumulates_at():
    target = 0.4
    walls = [_W(target + 0.1 * 2.0 ** -k) for k in range(6)]
    assert accumulates_at(walls, target)
    assert not accumulates_at(walls[:3], target)
    assert not accumulates_at([_W(target + 0.01 * k) for k in range(1, 7)], target)


# -- further closed-form and structural examples ------------------------------------------


def test_double_pole_residue_of_dz2_over_z2():
    r = residue(Q((1,), ((0, 2),)), "P0")
    assert min(abs(r - 4j * math.pi), abs(r + 4j * math.pi)) < 1e-9


def test_z2_plus_one_rays_all_reach_infinity():
    free, rays = is_saddle_free(Q((1, 0, 1)))
    assert free
    assert len(rays) == 6 and all(r.end.kind == "pole" and r.end.pole == "inf" for r in rays)


def test_z2_plus_i_has_a_horizontal_saddle():
    free, rays = is_saddle_free(Q((1j, 0, 1)))
    assert not free
    hits = [(r.start[0], r.end.zero) for r in rays if r.end.kind == "near_zero"]
    assert sorted(hits) == [(0, 1), (1, 0)]


def test_real_residue_double_pole_is_ringed_by_closed_trajectories():
    th = (cmath.phase(residue(EGG, "P0")) / math.pi) % 1
    seed, traj = find_closed_trajectory(EGG, th, [0.05, 0.1])
    assert traj is not None and traj.end.kind == "closed"
    # away from that phase the same seed spirals into the pole
    _, none = find_closed_trajectory(EGG, th + 0.1, [seed])
    assert none is None


def test_z2_plus_one_wkb_is_a_square():
    t, _ = wkb_triangulation(Z2)
    assert t.surface.boundary == (4,) and len(t.arcs) == 1 and len(t.boundary_segments) == 4


def test_annulus_periods_under_contour_deformation():
    a = standard_periods(ANNULUS.with_theta(0.30))
    b = standard_periods(ANNULUS.with_theta(0.35))
    assert close_sets(a.values(), b.values(), 1e-8)


def test_contractible_loop_has_trivial_monodromy():
    d = residue_monodromy_demo(1, center=1.5, radius=0.5)
    assert abs(d["residue_end"] - d["residue_start"]) < 1e-9
    assert abs(d["shift"]) < 1e-8
    with pytest.raises(ValueError):
        residue_monodromy_demo(1, center=-3)
