import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy_bellman.errors import DomainError
from hardy_bellman.Exponents import PRESETS, Exponents
from hardy_bellman.SpecialFunctions import (
    a_of_s2,
    a_prime,
    bellman_two_variable,
    h_derivative,
    h_function,
    omega_power_limit,
    omega_gap,
    omega,
    omega_derivative,
    omega_values,
    one_parameter_bound,
)
from hardy_bellman.utils import central_difference

E = Exponents(p=2.0, q=1.5)


def test_h_function_values():
    assert h_function(2.0, 1.0) == 1.0
    assert h_function(2.0, 2.0) == 0.0
    assert h_function(2.0, 3.0) == -3.0
    assert h_derivative(2.0, 1.0) == 0.0
    assert h_derivative(2.0, 3.0) == pytest.approx(-4.0)


def test_h_function_rejects_bad_input():
    with pytest.raises(DomainError):
        h_function(2.0, 0.5)
    with pytest.raises(DomainError):
        h_function(1.0, 2.0)


def test_omega_closed_form_for_p_two():
    # H_2(z) = 2z - z^2, so omega_2(s) = 1 + sqrt(1 - s)
    for s in (1.0, 0.96, 0.75, 0.0, -3.0, -48.0):
        assert omega_values(2.0, s) == pytest.approx(1.0 + math.sqrt(1.0 - s), rel=1e-12)


def test_omega_at_zero_is_conjugate_exponent():
    for r in (1.2, 1.5, 2.0, 3.0):
        assert omega_values(r, 0.0) == pytest.approx(r / (r - 1.0), rel=1e-12)


def test_omega_branch_record():
    branch = omega(2.0, 0.96)
    assert branch.value == pytest.approx(1.2, abs=1e-12)
    assert branch.residual <= 1e-12
    assert branch.argument == 0.96


def test_omega_vectorised_matches_scalar():
    s = np.array([-10.0, -1.0, 0.0, 0.5, 0.999999999, 1.0])
    values = omega_values(3.0, s)
    assert values.shape == s.shape
    for s_k, v_k in zip(s, values):
        assert v_k == pytest.approx(omega_values(3.0, float(s_k)), abs=1e-12)


def test_omega_rejects_argument_above_one():
    with pytest.raises(DomainError) as error:
        omega_values(2.0, 1.5)
    assert error.value.constraint == "s <= 1"


@settings(max_examples=200, deadline=None)
@given(r=st.floats(min_value=1.05, max_value=6.0), s=st.floats(min_value=-50.0, max_value=1.0))
def test_omega_inverts_h(r, s):
    w = omega_values(r, s)
    assert w >= 1.0
    assert abs(h_function(r, w) - s) <= 1e-10 * max(1.0, abs(s))


def test_omega_derivative_matches_closed_form_and_differences():
    # omega_2'(s) = -1 / (2 sqrt(1 - s))
    assert omega_derivative(2.0, 0.75) == pytest.approx(-1.0, rel=1e-10)
    estimate = central_difference(lambda s: omega_values(3.0, s), 0.3, 1e-5)
    assert omega_derivative(3.0, 0.3) == pytest.approx(estimate, rel=1e-5)
    with pytest.raises(DomainError):
        omega_derivative(2.0, 1.0)


def test_a_of_s2_vanishes_only_at_one():
    assert a_of_s2(E, 1.0) == 0.0
    values = a_of_s2(E, np.linspace(0.05, 0.95, 19))
    assert np.all(values > 0.0)
    assert np.all(np.diff(values) < 0.0)


def test_a_prime_matches_differences():
    for s2 in (0.2, 0.5, 0.9):
        estimate = central_difference(lambda s: a_of_s2(E, s), s2, 1e-5)
        assert a_prime(E, s2) < 0.0
        assert a_prime(E, s2) == pytest.approx(estimate, rel=1e-5)
    with pytest.raises(DomainError):
        a_prime(E, 1.0)


def test_bellman_two_variable_closed_form():
    assert bellman_two_variable(E, 1.0, 4.0) == pytest.approx(4.0 * (1.0 + math.sqrt(0.75)) ** 2, rel=1e-12)
    assert bellman_two_variable(E, 1.0, 1.0) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        bellman_two_variable(E, 2.0, 1.0)


def test_one_parameter_bound_is_minimised_at_omega():
    best = bellman_two_variable(E, 1.0, 4.0)
    beta_star = omega_values(2.0, 0.25) - 1.0
    assert one_parameter_bound(E, 1.0, 4.0, beta_star) == pytest.approx(best, rel=1e-10)
    for beta in (0.1, 0.5, 0.8, 1.0, 3.0):
        assert one_parameter_bound(E, 1.0, 4.0, beta) >= best * (1.0 - 1e-12)


def test_omega_power_limit_tends_to_limit():
    for p in (2.0, 3.0):
        exps = Exponents(p=p, q=1.5)
        for ell in (-0.5, -1.0, -2.0):
            limit = -ell / (p - 1.0)
            far = abs(omega_power_limit(exps, ell, 1e-2) - limit)
            near = abs(omega_power_limit(exps, ell, 1e-8) - limit)
            assert near < far
            assert omega_power_limit(exps, ell, 1e-8) == pytest.approx(limit, rel=1e-2)


def test_omega_power_limit_rejects_positive_level():
    with pytest.raises(DomainError):
        omega_power_limit(E, 0.5, 0.1)


@pytest.mark.parametrize("preset", sorted(PRESETS))
def test_omega_gap_positive(preset):
    lam = np.arange(1000) / 1000.0
    assert np.all(omega_gap(PRESETS[preset], lam) > 0.0)
