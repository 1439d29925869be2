from __future__ import annotations

import math

import mpmath
import pytest
from gmpy2 import mpq

from twocyc.dynamics import (
    ConcreteMap,
    HalfReturnProbe,
    count_2periodic,
    fit_half_return,
    full_return,
    half_return,
    half_return_quadrature,
    orientation_preserving_null,
    revalidate,
    staircase,
)


@pytest.fixture(scope="module")
def three_orbit_map():
    fmap = ConcreteMap([-7, 0, 10])
    return fmap, count_2periodic(fmap, mode="global")


def test_global_example(three_orbit_map):
    fmap, rep = three_orbit_map
    assert rep.count == 3
    assert len(rep.fixed_points) == 4 and "0" in rep.fixed_points
    assert rep.sturm_points == 2 * rep.count
    assert rep.stable_under_refinement
    for o in rep.orbits:
        x, y = mpmath.mpf(o.x), mpmath.mpf(o.y)
        assert o.residual < 1e-10
        with mpmath.workdps(40):
            assert abs(fmap(x) - y) < 1e-10 * max(1, abs(y))
        assert float(x) >= float(y)


def test_orbit_revalidation_shrinks_residuals(three_orbit_map):
    fmap, rep = three_orbit_map
    for old, new in revalidate(fmap, rep):
        assert new <= old * 1e-3 or new < 1e-100


@pytest.mark.parametrize("a2", [mpq(3), mpq(-1, 2)])
def test_d2_nonzero_root_is_fixed(a2):
    rep = count_2periodic(ConcreteMap([a2]), (0.0, float(1 / abs(a2))))
    assert rep.count == 0


def test_involution_is_non_isolated():
    rep = count_2periodic(ConcreteMap([]))
    assert rep.non_isolated and rep.count == 0


@pytest.mark.parametrize("coeffs", [[1], [0, 1], [-5, 1]])
def test_orientation_preserving_null(coeffs):
    res = orientation_preserving_null(coeffs)
    assert res["orbits"] == 0


def test_h_sign_follows_first_constant():
    from twocyc.stability import weak_point_order

    for d, pt in [(3, [1, -1]), (4, [0, 0, 1]), (7, [0, 0, 1, 0, 0, -2]), (5, [1, -1, 0, 2])]:
        wp = weak_point_order(pt, d)
        fmap = ConcreteMap(pt)
        with mpmath.workdps(80):
            for x in ("1e-3", "1e-4"):
                x = mpmath.mpf(x)
                disp = fmap(fmap(x)) - x
                assert (disp > 0) - (disp < 0) == wp.witness.sign(), (d, pt)


def test_local_window_counts_small_orbits():
    # the final staircase map, rescanned on a different window and grid
    res = staircase(4, [0, 0, 1])
    assert res.ok
    fmap = ConcreteMap([mpq(v) for v in res.steps[-1].params])
    rep = count_2periodic(fmap, (1e-5, 0.5), grid=4000)
    assert rep.count == 2


@pytest.mark.parametrize("d,base,expect", [(3, [1, -1], 1), (4, [0, 0, 1], 2)])
def test_staircase_small(d, base, expect):
    res = staircase(d, base)
    assert res.ok
    assert [s.orbits for s in res.steps] == list(range(1, expect + 1))
    assert res.final.count == expect
    assert res.final.stable_under_refinement
    assert all(o.residual < 1e-10 for o in res.final.orbits)


def test_staircase_rejects_uncertified_base():
    with pytest.raises(Exception):
        staircase(3, [0, 0])


# --- half-return map -----------------------------------------------------------------


def test_probe_parameters():
    p = HalfReturnProbe(2, -1.0, 0.5)
    assert p.delta == pytest.approx(1 / math.pi)
    assert p.gamma == pytest.approx(-(0.5 + 5 / 2) / math.pi)


def test_linear_center():
    probe = HalfReturnProbe(1, 0.0, 0.0)
    assert half_return(probe, 0.3) == -0.3
    assert half_return_quadrature(probe, 0.3) == -0.3


def test_half_return_leading_terms():
    probe = HalfReturnProbe(1, 1.0, 0.0)
    x = 1e-2
    v = half_return(probe, x)
    assert abs(v - (-x + x**3)) < 10 * x**5


def test_half_return_closed_form_coefficients():
    """a_{2l+1}(pi) = delta*pi and a_{4l+1}(pi) = gamma*pi + delta^2 (2l+1) pi^2 / 2."""
    for ell, sigma, c in [(1, 1.0, 0.0), (2, -1.0, 2.0)]:
        p = HalfReturnProbe(ell, sigma, c)
        a1 = p.delta * math.pi
        a2 = p.gamma * math.pi + p.delta**2 * (2 * ell + 1) * math.pi**2 / 2
        assert a1 == pytest.approx(-sigma, rel=1e-15)
        assert a2 == pytest.approx(-c, rel=1e-12, abs=1e-14)


def test_full_turn_is_double_half_turn():
    probe = HalfReturnProbe(1, -1.0, 2.0)
    for x in (0.02, 0.05):
        full = full_return(probe, x)
        assert abs(full - half_return(probe, half_return(probe, x))) <= 1e-11 * abs(full)


def test_fit_recovers_coefficients():
    fit = fit_half_return(1, 1.0, 0.5)
    errs = fit.errors()
    assert errs["linear"] <= 1e-6 and errs["sigma"] <= 1e-6 and errs["c"] <= 1e-6
    assert fit.max_quadrature_gap <= 1e-10
