"""
The sharp constant t(s1, s2) of the three-constraint Hardy inequality.

t0 solves phi(t0) = h(s1, s2) on [1, y0]; the sign of t'(0) decides whether t = t0 or t is the
greatest point of [1, t0] where the obstruction F_{s1,s2} is non-positive.
"""
import logging
from enum import Enum
from typing import List, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from hardy_bellman.Domain import SPoint
from hardy_bellman.errors import DomainError, InconsistencyError, SingularityError
from hardy_bellman.Exponents import Exponents
from hardy_bellman.RootFinder import RootResult, bracketed_root
from hardy_bellman.SpecialFunctions import ArrayLike, a_of_s2, omega_values

logger = logging.getLogger("hardy_bellman.SharpConstant")

DEFAULT_TOL = 1e-12
DEFAULT_SCAN = 512
SIGN_BAND = 1e-10
MATCH_BAND = 1e-9
UPPER_STEPS = 64


class Branch(str, Enum):
    T0_BRANCH = "T0_BRANCH"
    F_ROOT_BRANCH = "F_ROOT_BRANCH"
    MATCHED = "MATCHED"


class Sign(str, Enum):
    NEG = "NEG"
    ZERO = "ZERO"
    POS = "POS"


class SharpResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    t0: float
    t: float
    branch: Branch
    tprime0_sign: Sign
    residual_phi: float
    residual_F: float
    iterations: int
    bracket_limited: bool = False


class FProfile(BaseModel):
    """tau and F_{s1,s2} sampled on an increasing grid of [1, t0]."""

    model_config = ConfigDict(frozen=True)

    t1: List[float]
    tau: List[float]
    values: List[float]


def _phi(E: Exponents, y: np.ndarray) -> np.ndarray:
    return y ** E.p - E.ratio * y ** (E.p - E.q)


def _phi_prime(E: Exponents, y: np.ndarray) -> np.ndarray:
    return E.p * y ** (E.p - E.q - 1.0) * (y ** E.q - 1.0)


def phi(E: Exponents, y: ArrayLike) -> ArrayLike:
    """
    phi(y) = y^p - (p/(p-q)) y^(p-q).

    Minimal at y = 1 with value -q/(p-q), zero at y0 = (p/(p-q))^(1/q), increasing on [1, inf).
    """
    arr = np.asarray(y, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"phi is defined for y > 0, got {y!r}", constraint="y > 0", value=y)
    out = _phi(E, arr)
    return float(out) if arr.ndim == 0 else out


def phi_derivative(E: Exponents, y: ArrayLike) -> ArrayLike:
    """phi'(y) = p y^(p-q-1) (y^q - 1)."""
    arr = np.asarray(y, dtype=float)
    if np.any(~(arr > 0.0)):
        raise DomainError(f"phi' is defined for y > 0, got {y!r}", constraint="y > 0", value=y)
    out = _phi_prime(E, arr)
    return float(out) if arr.ndim == 0 else out


def h_bilinear(E: Exponents, P: SPoint) -> float:
    """h(s1, s2) = s1 - (p/(p-q)) s1/s2, which lies in (-q/(p-q), 0) on D."""
    return P.s1 - E.ratio * P.s1 / P.s2


def _upper_end(E: Exponents, level: float) -> float:
    # phi(y0) rounds to a few ulps either side of 0, so |h| that small needs y0 nudged up
    hi = E.y0
    for _ in range(UPPER_STEPS):
        if _phi(E, np.float64(hi)) - level >= 0.0:
            break
        hi = float(np.nextafter(hi, np.inf))
    return hi


def _solve_t0(E: Exponents, P: SPoint, tol: float) -> RootResult:
    level = h_bilinear(E, P)
    if not E.q / (E.q - E.p) < level < 0.0:
        raise DomainError(
            f"h(s1, s2)={level!r} outside (-q/(p-q), 0)", constraint="-q/(p-q) < h < 0", value=(P.s1, P.s2)
        )
    return bracketed_root(
        lambda y: _phi(E, y) - level,
        1.0,
        _upper_end(E, level),
        dfunc=lambda y: _phi_prime(E, y),
        tol=tol,
    ).scalar()


def solve_t0(E: Exponents, P: SPoint, tol: float = DEFAULT_TOL) -> float:
    """
    The root t0 of phi(t0) = h(s1, s2) on [1, y0].

    Args:
        E (Exponents): The exponent pair.
        P (SPoint): A validated point of D.
        tol (float): Residual tolerance on phi.

    Returns:
        float: t0, strictly above 1. It lies below y0 except when |h| is within rounding of 0,
            where it may land a few ulps past the rounded y0.
    """
    return _solve_t0(E, P, tol).root


def t0_gradient(E: Exponents, P: SPoint, tol: float = DEFAULT_TOL) -> Tuple[float, float]:
    """(dt0/ds1, dt0/ds2) by implicit differentiation of phi(t0) = h(s1, s2)."""
    t0 = solve_t0(E, P, tol)
    slope = _phi_prime(E, np.float64(t0))
    dh_ds1 = 1.0 - E.ratio / P.s2
    dh_ds2 = E.ratio * P.s1 / P.s2 ** 2
    return float(dh_ds1 / slope), float(dh_ds2 / slope)


def _check_denominator(E: Exponents, P: SPoint) -> None:
    # t1^(p-q) - s1/s2 increases in t1, so a zero on [1, t0] shows up at t1 = 1
    if not 1.0 - P.s1 / P.s2 > 0.0:
        raise SingularityError(
            f"tau denominator t1^(p-q) - s1/s2 vanishes on [1, t0] for s1={P.s1!r}, s2={P.s2!r}"
        )


def _tau(E: Exponents, P: SPoint, t1: np.ndarray) -> np.ndarray:
    numerator = t1 ** E.p - P.s1
    denominator = t1 ** (E.p - E.q) - P.s1 / P.s2
    return (E.p - E.q) / E.p * numerator / denominator


def _obstruction(E: Exponents, P: SPoint, a: float, t1: np.ndarray) -> np.ndarray:
    tau_values = np.minimum(_tau(E, P, t1), 1.0)
    w = np.asarray(omega_values(E.q, tau_values), dtype=float)
    p, q = E.p, E.q
    return q * (p * w ** (q - 1.0) - (p - 1.0) * w ** q) * (t1 ** (p - q) - P.s1 / P.s2) - (p - q) * P.s1 * a


def _check_t1(t1: np.ndarray, t0: float) -> None:
    slack = 1e-12 * t0
    if np.any(~((t1 >= 1.0 - slack) & (t1 <= t0 + slack))):
        raise DomainError(f"t1 must lie in [1, t0={t0!r}]", constraint="1 <= t1 <= t0", value=t1)


def tau(E: Exponents, P: SPoint, t1: ArrayLike) -> ArrayLike:
    """
    tau(t1) = ((p-q)/p) (t1^p - s1) / (t1^(p-q) - s1/s2) on [1, t0], with tau(t0) = 1.

    Raises:
        SingularityError: if the denominator vanishes inside [1, t0].
        DomainError: if t1 lies outside [1, t0].
    """
    _check_denominator(E, P)
    arr = np.asarray(t1, dtype=float)
    _check_t1(arr, solve_t0(E, P))
    out = _tau(E, P, arr)
    return float(out) if arr.ndim == 0 else out


def f_obstruction(E: Exponents, P: SPoint, t1: ArrayLike) -> ArrayLike:
    """
    F_{s1,s2}(t1) = q (p w^(q-1) - (p-1) w^q) (t1^(p-q) - s1/s2) - (p-q) s1 a(s2), w = omega_q(tau(t1)).

    Args:
        E (Exponents): The exponent pair.
        P (SPoint): A validated point of D.
        t1 (ArrayLike): Points of [1, t0].

    Returns:
        ArrayLike: F_{s1,s2}(t1).
    """
    _check_denominator(E, P)
    arr = np.asarray(t1, dtype=float)
    _check_t1(arr, solve_t0(E, P))
    out = _obstruction(E, P, a_of_s2(E, P.s2), arr)
    return float(out) if arr.ndim == 0 else out


def e_threshold(E: Exponents, P: SPoint) -> float:
    """E(s1, s2) = ((p-q)/q) s1 a(s2) + s1/s2."""
    return (E.p - E.q) / E.q * P.s1 * a_of_s2(E, P.s2) + P.s1 / P.s2


def _sign(E: Exponents, P: SPoint, t0: float, band: float) -> Sign:
    threshold = e_threshold(E, P)
    gap = t0 ** (E.p - E.q) - threshold
    width = band * max(1.0, threshold)
    if gap > width:
        return Sign.NEG
    if gap < -width:
        return Sign.POS
    return Sign.ZERO


def tprime0_sign(E: Exponents, P: SPoint, tol: float = SIGN_BAND) -> Sign:
    """
    Sign of t'(0): NEG when t0^(p-q) > E(s1, s2), POS when below, ZERO within tol * max(1, E).
    """
    return _sign(E, P, solve_t0(E, P), tol)


def f_profile(E: Exponents, P: SPoint, n: int = DEFAULT_SCAN) -> FProfile:
    """Sample tau and F_{s1,s2} on n equally spaced points from 1 to t0."""
    if n < 2:
        raise DomainError(f"profile needs at least 2 points, got {n!r}", constraint="n >= 2", value=n)
    _check_denominator(E, P)
    t0 = solve_t0(E, P)
    grid = np.linspace(1.0, t0, n)
    values = _obstruction(E, P, a_of_s2(E, P.s2), grid)
    return FProfile(t1=grid.tolist(), tau=_tau(E, P, grid).tolist(), values=values.tolist())


def sharp_t(
    E: Exponents,
    P: SPoint,
    tol: float = DEFAULT_TOL,
    scan: int = DEFAULT_SCAN,
    sign_band: float = SIGN_BAND,
    match_band: float = MATCH_BAND,
) -> SharpResult:
    """
    The greatest t in [1, t0] with F_{s1,s2}(t) <= 0.

    Args:
        E (Exponents): The exponent pair.
        P (SPoint): A validated point of D.
        tol (float): Residual tolerance of the t0 and F root solves.
        scan (int): Number of points of the descending scan of F from t0 to 1.
        sign_band (float): Relative width of the ZERO band of the t'(0) test.
        match_band (float): |omega_p(s1) - omega_q(s2)| below which the point counts as matched.

    Returns:
        SharpResult: t0, t, the branch taken and residuals. F has square-root conditioning where
        tau approaches 1, so next to t0 the best double t can leave |F| near sqrt(eps) times the
        scale of F. The solve then stops on a collapsed bracket, residual_F may exceed tol and
        bracket_limited is set. The same flag covers the t0 solve close to y = 1, where phi is flat.

    Raises:
        SingularityError: if the tau denominator vanishes on [1, t0].
        InconsistencyError: if F is positive on the whole scan.
        ConvergenceError: if a root solve runs out of iterations.
    """
    _check_denominator(E, P)
    t0_solve = _solve_t0(E, P, tol)
    t0 = t0_solve.root
    sign = _sign(E, P, t0, sign_band)
    a = a_of_s2(E, P.s2)

    def result(t: float, branch: Branch, residual_F: float, iterations: int, converged: bool = True) -> SharpResult:
        return SharpResult(
            t0=t0,
            t=t,
            branch=branch,
            tprime0_sign=sign,
            residual_phi=t0_solve.residual,
            residual_F=residual_F,
            iterations=t0_solve.iterations + iterations,
            bracket_limited=not (t0_solve.converged and converged),
        )

    if sign is Sign.POS:
        return result(t0, Branch.T0_BRANCH, 0.0, 0)

    w_p = float(omega_values(E.p, P.s1))
    w_q = float(omega_values(E.q, P.s2))
    if abs(w_p - w_q) <= match_band:
        t = min(w_p, t0)
        residual = abs(float(_obstruction(E, P, a, np.float64(t))))
        logger.debug("matched point s1=%r s2=%r: t = omega_p(s1) = %r", P.s1, P.s2, t)
        return result(t, Branch.MATCHED, residual, 0)

    if sign is Sign.ZERO:
        residual = abs(float(_obstruction(E, P, a, np.float64(t0))))
        return result(t0, Branch.F_ROOT_BRANCH, residual, 0)

    grid = np.linspace(t0, 1.0, scan)
    values = _obstruction(E, P, a, grid)
    hits = np.flatnonzero(values <= 0.0)
    if hits.size == 0:
        raise InconsistencyError(
            f"F_(s1,s2) > 0 on all of [1, t0] for s1={P.s1!r}, s2={P.s2!r} (min {float(np.min(values))!r})"
        )
    k = int(hits[0])
    if k == 0 or values[k] == 0.0:
        return result(float(grid[k]), Branch.F_ROOT_BRANCH, abs(float(values[k])), 0)

    refined = bracketed_root(
        lambda t: _obstruction(E, P, a, t),
        grid[k],
        grid[k - 1],
        tol=tol,
    ).scalar()
    logger.debug("F root for s1=%r s2=%r at t=%r (scan index %d)", P.s1, P.s2, refined.root, k)
    return result(refined.root, Branch.F_ROOT_BRANCH, refined.residual, refined.iterations, refined.converged)
