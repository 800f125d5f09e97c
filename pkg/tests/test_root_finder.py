import numpy as np
import pytest

from hardy_bellman.errors import ConvergenceError, DomainError
from hardy_bellman.RootFinder import bracketed_root


def test_residual_target_met():
    result = bracketed_root(lambda x: x * x - 2.0, 1.0, 2.0, dfunc=lambda x: 2.0 * x, tol=1e-12).scalar()
    assert result.root == pytest.approx(2.0 ** 0.5, rel=1e-12)
    assert result.residual <= 1e-12
    assert result.converged


def test_collapsed_bracket_is_not_converged():
    # x^2 - 2 has no double root, so a zero tolerance can only end on a collapsed bracket
    result = bracketed_root(lambda x: x * x - 2.0, 1.0, 2.0, tol=0.0).scalar()
    assert result.root == pytest.approx(2.0 ** 0.5, rel=1e-14)
    assert result.residual > 0.0
    assert not result.converged


def test_flags_are_per_element():
    targets = np.array([2.0, 4.0])
    result = bracketed_root(lambda x: x * x - targets, np.array([1.0, 1.0]), np.array([2.0, 3.0]), tol=0.0)
    assert result.converged.tolist() == [False, True]
    assert result.root[1] == 2.0


def test_bracket_without_sign_change():
    with pytest.raises(DomainError):
        bracketed_root(lambda x: x * x + 1.0, -1.0, 1.0)


def test_budget_exhausted():
    with pytest.raises(ConvergenceError) as info:
        bracketed_root(lambda x: x - 1.0 / 3.0, 0.0, 1.0, tol=0.0, max_iter=5)
    assert info.value.iterations == 5
