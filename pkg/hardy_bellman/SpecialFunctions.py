"""
H_r, its inverse omega_r on the decreasing branch, and the closed forms built on them.

Every function accepts a float or a numpy array and returns the same kind.
"""
import logging
import math
from typing import Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict

from hardy_bellman.errors import DomainError
from hardy_bellman.Exponents import Exponents
from hardy_bellman.RootFinder import bracketed_root

ArrayLike = Union[float, np.ndarray]

logger = logging.getLogger("hardy_bellman.SpecialFunctions")

DEFAULT_TOL = 1e-12
# below this distance from s = 1 omega' blows up and Newton overshoots
NEWTON_CUTOFF = 1e-8
_MAX_DOUBLINGS = 1100


class OmegaBranch(BaseModel):
    """A solved point of omega_r: value >= 1 with H_r(value) = argument up to residual."""

    model_config = ConfigDict(frozen=True)

    r: float
    argument: float
    value: float
    residual: float


def _as_array(x: ArrayLike) -> Tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _finish(arr: np.ndarray, scalar: bool) -> ArrayLike:
    return float(arr) if scalar else arr


def _check_exponent(r: float) -> None:
    if not (math.isfinite(r) and r > 1.0):
        raise DomainError(f"exponent must be finite and > 1, got {r!r}", constraint="r > 1", value=r)


def _h(r: float, z: np.ndarray) -> np.ndarray:
    return r * z ** (r - 1.0) - (r - 1.0) * z ** r


def _h_prime(r: float, z: np.ndarray) -> np.ndarray:
    return r * (r - 1.0) * z ** (r - 2.0) * (1.0 - z)


def h_function(r: float, z: ArrayLike) -> ArrayLike:
    """
    H_r(z) = r z^(r-1) - (r-1) z^r on z >= 1, decreasing from H_r(1) = 1 to -infinity.

    Args:
        r (float): Exponent > 1.
        z (ArrayLike): Points >= 1.

    Returns:
        ArrayLike: H_r(z).

    Raises:
        DomainError: if r <= 1 or some z < 1.
    """
    _check_exponent(r)
    arr, scalar = _as_array(z)
    if np.any(~(arr >= 1.0)):
        raise DomainError(f"H_r is evaluated on z >= 1, got {z!r}", constraint="z >= 1", value=z)
    return _finish(_h(r, arr), scalar)


def h_derivative(r: float, z: ArrayLike) -> ArrayLike:
    """H_r'(z) = r (r-1) z^(r-2) (1 - z); non-positive on z >= 1."""
    _check_exponent(r)
    arr, scalar = _as_array(z)
    if np.any(~(arr >= 1.0)):
        raise DomainError(f"H_r' is evaluated on z >= 1, got {z!r}", constraint="z >= 1", value=z)
    return _finish(_h_prime(r, arr), scalar)


def omega_values(r: float, s: ArrayLike, tol: float = DEFAULT_TOL, max_iter: int = 200) -> ArrayLike:
    """
    Vectorised omega_r(s): the unique t >= 1 with H_r(t) = s, for every s <= 1.

    For s in [0, 1] the root lies in [1, r/(r-1)]. For s < 0 the upper end of the bracket is
    doubled until H_r(hi) < s. The residual target is tol * max(1, |s|); within NEWTON_CUTOFF of
    s = 1 the solve is pure bisection.

    Raises:
        DomainError: if r <= 1 or some s > 1.
        ConvergenceError: if the residual is not met within max_iter iterations.
    """
    _check_exponent(r)
    arr, scalar = _as_array(s)
    flat = arr.ravel()
    if np.any(~(flat <= 1.0)):
        raise DomainError(f"omega_r is defined for s <= 1, got {s!r}", constraint="s <= 1", value=s)

    lo = np.ones_like(flat)
    hi = np.full_like(flat, r / (r - 1.0))
    for _ in range(_MAX_DOUBLINGS):
        short = _h(r, hi) >= flat
        short &= flat < 1.0
        if not np.any(short):
            break
        hi = np.where(short, 2.0 * hi, hi)

    result = bracketed_root(
        lambda t: _h(r, t) - flat,
        lo,
        hi,
        dfunc=lambda t: _h_prime(r, t),
        tol=tol * np.maximum(1.0, np.abs(flat)),
        max_iter=max_iter,
        newton_mask=np.abs(1.0 - flat) >= NEWTON_CUTOFF,
    )
    values = result.root.reshape(arr.shape)
    return _finish(values, scalar)


def omega(r: float, s: float, tol: float = DEFAULT_TOL) -> OmegaBranch:
    """
    Solve H_r(t) = s on the decreasing branch t >= 1.

    Args:
        r (float): Exponent > 1.
        s (float): Argument <= 1.
        tol (float): Residual tolerance, scaled by max(1, |s|).

    Returns:
        OmegaBranch: the root with its residual.
    """
    value = omega_values(r, float(s), tol=tol)
    residual = abs(float(_h(r, np.float64(value))) - float(s))
    return OmegaBranch(r=r, argument=float(s), value=value, residual=residual)


def omega_derivative(r: float, s: ArrayLike) -> ArrayLike:
    """
    omega_r'(s) = 1 / (r (r-1) omega^(r-2) (1 - omega)), negative for every s < 1.

    Raises:
        DomainError: at s >= 1, where the derivative is singular.
    """
    _check_exponent(r)
    arr, scalar = _as_array(s)
    if np.any(~(arr < 1.0)):
        raise DomainError(f"omega_r' is singular at s = 1, got {s!r}", constraint="s < 1", value=s)
    w = np.asarray(omega_values(r, arr), dtype=float)
    return _finish(1.0 / _h_prime(r, w), scalar)


def a_of_s2(E: Exponents, s2: ArrayLike) -> ArrayLike:
    """a(s2) = omega_q(s2)^q / s2 - 1 on (0, 1]; zero only at s2 = 1."""
    arr, scalar = _as_array(s2)
    if np.any(~((arr > 0.0) & (arr <= 1.0))):
        raise DomainError(f"a(s2) needs 0 < s2 <= 1, got {s2!r}", constraint="0 < s2 <= 1", value=s2)
    w = np.asarray(omega_values(E.q, arr), dtype=float)
    return _finish(w ** E.q / arr - 1.0, scalar)


def a_prime(E: Exponents, s2: ArrayLike) -> ArrayLike:
    """
    Derivative of a(s2) on (0, 1):

        a'(s2) = (1/s2) [ -omega/((q-1)(omega-1)) - omega^q/s2 ],  omega = omega_q(s2).

    Always negative; singular as s2 -> 1-.
    """
    arr, scalar = _as_array(s2)
    if np.any(~((arr > 0.0) & (arr < 1.0))):
        raise DomainError(f"a'(s2) needs 0 < s2 < 1, got {s2!r}", constraint="0 < s2 < 1", value=s2)
    q = E.q
    w = np.asarray(omega_values(q, arr), dtype=float)
    return _finish((-w / ((q - 1.0) * (w - 1.0)) - w ** q / arr) / arr, scalar)


def bellman_two_variable(E: Exponents, f: float, F: float) -> float:
    """
    The two-variable Bellman value F * omega_p(f^p / F)^p, between F and (p/(p-1))^p F.

    Raises:
        DomainError: unless 0 < f and f^p <= F.
    """
    p = E.p
    if not (f > 0.0 and F > 0.0):
        raise DomainError(f"need f > 0 and F > 0, got f={f!r}, F={F!r}", constraint="f > 0, F > 0", value=(f, F))
    s = f ** p / F
    if s > 1.0:
        raise DomainError(f"need f^p <= F, got f^p={f ** p!r} > F={F!r}", constraint="f^p <= F", value=(f, F))
    return F * omega_values(p, s) ** p


def one_parameter_bound(E: Exponents, f: float, F: float, beta: float) -> float:
    """
    Upper bound on the integral of (M phi)^p from the one-parameter inequality

        F >= f^p / (beta+1)^(p-1) + (p-1) beta / (beta+1)^p * integral,

    valid for every beta > 0. The minimum over beta, reached at beta = omega_p(f^p/F) - 1,
    is bellman_two_variable(E, f, F).
    """
    p = E.p
    if not beta > 0.0:
        raise DomainError(f"beta must be positive, got {beta!r}", constraint="beta > 0", value=beta)
    if not (f > 0.0 and f ** p <= F):
        raise DomainError(f"need 0 < f^p <= F, got f={f!r}, F={F!r}", constraint="f^p <= F", value=(f, F))
    return (beta + 1.0) ** p / ((p - 1.0) * beta) * (F - f ** p / (beta + 1.0) ** (p - 1.0))


def omega_power_limit(E: Exponents, ell: float, alpha: float) -> float:
    """
    alpha * omega_p(ell / alpha)^p, which tends to -ell/(p-1) as alpha -> 0+.

    Args:
        E (Exponents): Uses p.
        ell (float): Non-positive level.
        alpha (float): Positive scale.
    """
    if not ell <= 0.0:
        raise DomainError(f"ell must be <= 0, got {ell!r}", constraint="ell <= 0", value=ell)
    if not alpha > 0.0:
        raise DomainError(f"alpha must be > 0, got {alpha!r}", constraint="alpha > 0", value=alpha)
    return alpha * omega_values(E.p, ell / alpha) ** E.p


def omega_gap(E: Exponents, lam: ArrayLike) -> ArrayLike:
    """omega_q(lam^(q-1)) - omega_p(lam^(p-1)), strictly positive for lam in [0, 1)."""
    arr, scalar = _as_array(lam)
    if np.any(~((arr >= 0.0) & (arr < 1.0))):
        raise DomainError(f"lambda must lie in [0, 1), got {lam!r}", constraint="0 <= lambda < 1", value=lam)
    gap = np.asarray(omega_values(E.q, arr ** (E.q - 1.0)), dtype=float) - np.asarray(
        omega_values(E.p, arr ** (E.p - 1.0)), dtype=float
    )
    return _finish(gap, scalar)
