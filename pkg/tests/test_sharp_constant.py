import numpy as np
import pytest

import hardy_bellman.SharpConstant as SharpConstant
from hardy_bellman.Domain import SPoint, validate_spoint
from hardy_bellman.errors import DomainError, InconsistencyError, SingularityError
from hardy_bellman.Exponents import PRESETS
from hardy_bellman.RegionAtlas import s2_double_prime
from hardy_bellman.SharpConstant import (
    Branch,
    Sign,
    e_threshold,
    f_obstruction,
    f_profile,
    h_bilinear,
    phi,
    phi_derivative,
    sharp_t,
    solve_t0,
    t0_gradient,
    tau,
    tprime0_sign,
)
from hardy_bellman.SpecialFunctions import h_function
from hardy_bellman.utils import central_difference
from matched_points import MATCHED_S2, P2Q15, matched_point, random_points, x_region_point

E = P2Q15


def test_phi_values():
    assert phi(E, 1.0) == pytest.approx(-3.0, rel=1e-12)
    assert phi(E, E.y0) == pytest.approx(0.0, abs=1e-12)
    grid = np.linspace(1.0, E.y0, 50)
    assert np.all(np.diff(phi(E, grid)) > 0.0)


def test_phi_derivative():
    assert phi_derivative(E, 1.0) == 0.0
    estimate = central_difference(lambda y: phi(E, y), 1.7, 1e-6)
    assert phi_derivative(E, 1.7) == pytest.approx(estimate, rel=1e-7)


def test_h_bilinear_example():
    P = validate_spoint(E, 0.5, 0.9)
    assert h_bilinear(E, P) == pytest.approx(0.5 - 4.0 * 0.5 / 0.9, rel=1e-14)


def test_t0_solves_phi_equation():
    P = validate_spoint(E, 0.5, 0.9)
    t0 = solve_t0(E, P)
    assert 1.0 < t0 < E.y0
    assert abs(phi(E, t0) - h_bilinear(E, P)) <= 1e-11


def test_tau_equals_one_at_t0():
    for P in random_points(E, 10):
        assert tau(E, P, solve_t0(E, P)) == pytest.approx(1.0, abs=1e-9)


def test_tau_outside_interval_rejected():
    P = validate_spoint(E, 0.5, 0.9)
    with pytest.raises(DomainError):
        tau(E, P, 0.9)


def test_tau_singular_denominator():
    with pytest.raises(SingularityError):
        tau(E, SPoint(s1=0.9, s2=0.8), 1.0)


def test_obstruction_vanishes_at_matched_point():
    P = matched_point(E, 1.2)
    assert P.s2 == pytest.approx(MATCHED_S2, abs=1e-15)
    assert abs(f_obstruction(E, P, 1.2)) <= 1e-9
    assert tau(E, P, 1.2) < 1.0


def test_matched_point_takes_matched_branch():
    P = validate_spoint(E, h_function(2.0, 1.2), MATCHED_S2)
    result = sharp_t(E, P)
    assert result.branch == Branch.MATCHED
    assert result.tprime0_sign == Sign.NEG
    assert result.t == pytest.approx(1.2, abs=1e-8)
    assert 1.2 < result.t0


def test_rounded_matched_point_uses_f_root():
    # six-digit s2 misses the matching band, so t comes from the F scan
    P = validate_spoint(E, 0.96, 0.985901)
    result = sharp_t(E, P)
    assert result.branch == Branch.F_ROOT_BRANCH
    assert result.t == pytest.approx(1.2, abs=1e-3)
    assert result.residual_F <= 1e-9


def test_t0_obstruction_identity():
    # F(t0) = q (t0^(p-q) - E(s1, s2)); omega_q near 1 amplifies the t0 residual to about its square root
    for P in random_points(E, 8):
        t0 = solve_t0(E, P)
        expected = E.q * (t0 ** (E.p - E.q) - e_threshold(E, P))
        assert f_obstruction(E, P, t0) == pytest.approx(expected, abs=1e-4)


def test_positive_sign_returns_t0():
    P = x_region_point(E)
    assert P is not None
    assert tprime0_sign(E, P) == Sign.POS
    result = sharp_t(E, P)
    assert result.branch == Branch.T0_BRANCH
    assert result.t == result.t0
    assert result.residual_F == 0.0


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_sharp_t_lies_in_unit_to_t0(preset):
    exps = PRESETS[preset]
    for P in random_points(exps, 12, seed=11):
        result = sharp_t(exps, P)
        assert 1.0 <= result.t <= result.t0 * (1.0 + 1e-12)
        assert result.residual_phi <= 1e-11


def test_t0_gradient_matches_differences():
    P = validate_spoint(E, 0.5, 0.9)
    d1, d2 = t0_gradient(E, P)
    e1 = central_difference(lambda s: solve_t0(E, SPoint(s1=s, s2=0.9)), 0.5, 1e-6)
    e2 = central_difference(lambda s: solve_t0(E, SPoint(s1=0.5, s2=s)), 0.9, 1e-6)
    assert d1 == pytest.approx(e1, rel=1e-5)
    assert d2 == pytest.approx(e2, rel=1e-5)
    assert d2 > 0.0


def test_f_profile_ends_at_t0():
    P = validate_spoint(E, 0.5, 0.9)
    profile = f_profile(E, P, n=64)
    assert len(profile.t1) == 64
    assert profile.t1[0] == 1.0
    assert profile.t1[-1] == pytest.approx(solve_t0(E, P))
    assert profile.tau[-1] == pytest.approx(1.0, abs=1e-9)


def test_positive_obstruction_everywhere_is_inconsistent(monkeypatch):
    P = validate_spoint(E, 0.96, 0.985901)
    monkeypatch.setattr(SharpConstant, "_obstruction", lambda E_, P_, a, t1: np.ones_like(t1))
    with pytest.raises(InconsistencyError):
        sharp_t(E, P)


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_t0_when_h_is_within_rounding_of_zero(preset):
    exps = PRESETS[preset]
    P = validate_spoint(exps, 1e-16, 0.5)
    t0 = solve_t0(exps, P)
    assert 1.0 < t0 <= exps.y0 * (1.0 + 1e-12)
    assert t0 == pytest.approx(exps.y0, rel=1e-12)
    result = sharp_t(exps, P)
    assert result.tprime0_sign == Sign.NEG
    assert 1.0 <= result.t <= result.t0


def test_f_root_next_to_the_sign_threshold():
    exps = PRESETS["p3q2"]
    s1 = 0.8
    P = validate_spoint(exps, s1, s2_double_prime(exps, s1) * (1.0 + 1e-7))
    result = sharp_t(exps, P, tol=1e-12)
    assert result.branch == Branch.F_ROOT_BRANCH
    assert 1.0 <= result.t <= result.t0
    # F is square-root steep next to t0, so a double t can only get |F| to about sqrt(eps)
    assert result.residual_F <= 1e-12 or result.bracket_limited
    assert result.residual_F <= 1e-6
