import pytest

from hardy_bellman.Domain import (
    MomentData,
    check_moments,
    g_of_kappa,
    g_prime,
    moments_to_spoint,
    plant_moments,
    solve_kappa,
    validate_spoint,
)
from hardy_bellman.errors import DegenerateMomentsError, DomainError, PreconditionError
from hardy_bellman.Exponents import PRESETS, Exponents
from hardy_bellman.SpecialFunctions import omega_values
from hardy_bellman.utils import central_difference

E = Exponents(p=2.0, q=1.5)


def test_exponents_require_order():
    with pytest.raises(ValueError):
        Exponents(p=1.5, q=2.0)
    with pytest.raises(ValueError):
        Exponents(p=2.0, q=1.0)
    assert E.ratio == 4.0
    assert E.slope == 0.5
    assert E.key() == "p2q1.5"


def test_validate_accepts_interior_point():
    P = validate_spoint(E, 0.96, 0.985901)
    assert (P.s1, P.s2) == (0.96, 0.985901)


def test_validate_names_violated_inequality():
    with pytest.raises(DomainError) as error:
        validate_spoint(E, 0.96, 0.9)
    assert error.value.constraint == "s1^(q-1) <= s2^(p-1)"

    with pytest.raises(DomainError) as error:
        validate_spoint(E, 0.5, 1.0)
    assert error.value.constraint == "s2^(p-1) < 1"

    with pytest.raises(DomainError) as error:
        validate_spoint(E, 0.0, 0.5)
    assert error.value.constraint == "0 < s1"


def test_lower_boundary_belongs_to_domain():
    P = validate_spoint(E, 0.25, 0.5)
    assert P.s2 == 0.5


def test_moments_to_spoint_unit_mass():
    # A must lie in (f^q, f^((p-q)/(p-1)) F^((q-1)/(p-1))) = (1, sqrt(2))
    P = moments_to_spoint(E, MomentData(f=1.0, A=1.2, F=2.0))
    assert P.s1 == pytest.approx(0.5)
    assert P.s2 == pytest.approx(1.0 / 1.2)


def test_moments_to_spoint_scales_with_mass():
    full = moments_to_spoint(E, MomentData(f=1.0, A=1.5, F=4.0))
    half = moments_to_spoint(E, MomentData(f=1.0, A=1.5, F=4.0, kappa=0.5))
    assert full.s1 == pytest.approx(0.25)
    assert half.s1 == pytest.approx(0.5)
    assert half.s2 == pytest.approx(full.s2 * 2.0 ** 0.5)


def test_moment_conditions():
    with pytest.raises(DegenerateMomentsError):
        check_moments(E, MomentData(f=1.0, A=1.0, F=1.0))
    with pytest.raises(DomainError) as error:
        check_moments(E, MomentData(f=1.0, A=1.5, F=2.0))
    assert error.value.constraint == "A < f^((p-q)/(p-1)) F^((q-1)/(p-1))"
    with pytest.raises(ValueError):
        MomentData(f=-1.0, A=1.0, F=1.0)


def test_g_endpoints():
    # left end (f^p/F)^(1/(p-1)) = 1/2, where g = (1/2)^((q-1)/(p-1))
    assert g_of_kappa(E, 1.0, 2.0, 0.5) == pytest.approx(0.5 ** 0.5, rel=1e-12)
    expected = 1.5 * omega_values(2.0, 0.5) ** 0.5 - 0.5 * omega_values(2.0, 0.5) ** 1.5
    assert g_of_kappa(E, 1.0, 2.0, 1.0) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(DomainError):
        g_of_kappa(E, 1.0, 2.0, 0.4)


def test_g_increasing_with_matching_derivative():
    kappas = [0.55, 0.6, 0.7, 0.8, 0.9, 0.99]
    values = [g_of_kappa(E, 1.0, 2.0, k) for k in kappas]
    assert all(b > a for a, b in zip(values, values[1:]))
    for k in (0.6, 0.9):
        estimate = central_difference(lambda x: g_of_kappa(E, 1.0, 2.0, x), k, 1e-5)
        assert g_prime(E, 1.0, 2.0, k) == pytest.approx(estimate, rel=1e-5)


def test_solve_kappa_matches_omegas():
    kappa = solve_kappa(E, 1.0, 1.3, 2.0)
    assert (1.0 / 1.3) ** 2 < kappa < 1.0
    P = moments_to_spoint(E, MomentData(f=1.0, A=1.3, F=2.0, kappa=kappa))
    assert omega_values(E.q, P.s2) == pytest.approx(omega_values(E.p, P.s1), abs=1e-8)


def test_solve_kappa_rejects_failed_hypothesis():
    # omega_q(1/1.18) is about 1.7000 while omega_p(1/2) = 1 + sqrt(1/2)
    with pytest.raises(PreconditionError) as error:
        solve_kappa(E, 1.0, 1.18, 2.0)
    assert error.value.constraint == "omega_q(f^q/A) > omega_p(f^p/F)"


def test_solve_kappa_rejects_degenerate_moments():
    with pytest.raises(DegenerateMomentsError):
        solve_kappa(E, 1.0, 1.0, 2.0)


@pytest.mark.parametrize("preset", sorted(PRESETS))
@pytest.mark.parametrize("kappa", [0.3, 0.75, 0.95])
def test_solve_kappa_recovers_planted_mass(preset, kappa):
    exps = PRESETS[preset]
    gamma = 1.0 + 0.5 * (exps.p_conjugate - 1.0)
    M = plant_moments(exps, kappa, gamma)
    assert solve_kappa(exps, M.f, M.A, M.F) == pytest.approx(kappa, rel=1e-9)


def test_plant_moments_checks_inputs():
    with pytest.raises(DomainError):
        plant_moments(E, 1.0, 1.5)
    with pytest.raises(DomainError):
        plant_moments(E, 0.5, 2.0)
