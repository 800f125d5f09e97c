"""
The parameter domain D, the moment data of a test function and the mass solver.
"""
import logging
import math

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from hardy_bellman.errors import DegenerateMomentsError, DomainError, PreconditionError
from hardy_bellman.Exponents import Exponents
from hardy_bellman.RootFinder import bracketed_root
from hardy_bellman.SpecialFunctions import h_function, omega_values

logger = logging.getLogger("hardy_bellman.Domain")

_DEGENERATE_RTOL = 4.0 * np.finfo(float).eps


class SPoint(BaseModel):
    """
    A point (s1, s2) of D = {0 < s1^(q-1) <= s2^(p-1) < 1}.

    Build it through validate_spoint, which knows the exponents.
    """

    model_config = ConfigDict(frozen=True)

    s1: float
    s2: float


class MomentData(BaseModel):
    """
    Moments of a non-negative test function on (0, kappa]: f = integral, A = q-th and F = p-th moment.
    """

    model_config = ConfigDict(frozen=True)

    f: float
    A: float
    F: float
    kappa: float = 1.0

    @model_validator(mode="after")
    def _check_signs(self) -> "MomentData":
        for name in ("f", "A", "F", "kappa"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and positive, got {value!r}")
        if self.kappa > 1.0:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa!r}")
        return self


def validate_spoint(E: Exponents, s1: float, s2: float) -> SPoint:
    """
    Check membership of (s1, s2) in D.

    Args:
        E (Exponents): The exponent pair.
        s1 (float): First coordinate.
        s2 (float): Second coordinate.

    Returns:
        SPoint: The validated point.

    Raises:
        DomainError: naming the first violated inequality.
    """
    s1, s2 = float(s1), float(s2)
    if not (math.isfinite(s1) and s1 > 0.0):
        raise DomainError(f"s1 must be positive, got {s1!r}", constraint="0 < s1", value=(s1, s2))
    if not (math.isfinite(s2) and s2 < 1.0):
        raise DomainError(f"s2^(p-1) < 1 fails for s2={s2!r}", constraint="s2^(p-1) < 1", value=(s1, s2))
    if not s2 > 0.0:
        raise DomainError(f"s2 must be positive, got {s2!r}", constraint="0 < s2", value=(s1, s2))
    if not s1 ** (E.q - 1.0) <= s2 ** (E.p - 1.0):
        raise DomainError(
            f"s1^(q-1) = {s1 ** (E.q - 1.0)!r} exceeds s2^(p-1) = {s2 ** (E.p - 1.0)!r}",
            constraint="s1^(q-1) <= s2^(p-1)",
            value=(s1, s2),
        )
    return SPoint(s1=s1, s2=s2)


def check_moments(E: Exponents, M: MomentData) -> MomentData:
    """
    Enforce f^q kappa^(1-q) < A < f^((p-q)/(p-1)) F^((q-1)/(p-1)); at kappa = 1 this is the unit-mass moment condition.

    Raises:
        DegenerateMomentsError: when A equals its constant-function value f^q kappa^(1-q).
        DomainError: when either strict inequality fails otherwise.
    """
    p, q = E.p, E.q
    lower = M.f ** q * M.kappa ** (1.0 - q)
    upper = M.f ** ((p - q) / (p - 1.0)) * M.F ** ((q - 1.0) / (p - 1.0))
    if abs(M.A - lower) <= _DEGENERATE_RTOL * lower:
        raise DegenerateMomentsError(
            f"A={M.A!r} equals f^q kappa^(1-q): the moments describe a constant function",
            constraint="f^q kappa^(1-q) < A",
            value=M.A,
        )
    if not M.A > lower:
        raise DomainError(
            f"A={M.A!r} must exceed f^q kappa^(1-q)={lower!r}", constraint="f^q kappa^(1-q) < A", value=M.A
        )
    if not M.A < upper:
        raise DomainError(
            f"A={M.A!r} must stay below f^((p-q)/(p-1)) F^((q-1)/(p-1))={upper!r}",
            constraint="A < f^((p-q)/(p-1)) F^((q-1)/(p-1))",
            value=M.A,
        )
    return M


def moments_to_spoint(E: Exponents, M: MomentData) -> SPoint:
    """s1 = f^p / (kappa^(p-1) F) and s2 = f^q / (kappa^(q-1) A), validated against D."""
    check_moments(E, M)
    s1 = M.f ** E.p / (M.kappa ** (E.p - 1.0) * M.F)
    s2 = M.f ** E.q / (M.kappa ** (E.q - 1.0) * M.A)
    return validate_spoint(E, s1, s2)


def _g(E: Exponents, f: float, F: float, kappa: np.ndarray) -> np.ndarray:
    s = np.minimum(f ** E.p / (kappa ** (E.p - 1.0) * F), 1.0)
    w = np.asarray(omega_values(E.p, s), dtype=float)
    q = E.q
    return kappa ** (q - 1.0) * (q * w ** (q - 1.0) - (q - 1.0) * w ** q)


def _g_prime(E: Exponents, f: float, F: float, kappa: np.ndarray) -> np.ndarray:
    s = np.minimum(f ** E.p / (kappa ** (E.p - 1.0) * F), 1.0)
    w = np.asarray(omega_values(E.p, s), dtype=float)
    p, q = E.p, E.q
    return (q - 1.0) * (p - q) / p * kappa ** (q - 2.0) * w ** q


def _kappa_floor(E: Exponents, f: float, F: float) -> float:
    return (f ** E.p / F) ** (1.0 / (E.p - 1.0))


def _check_kappa(E: Exponents, f: float, F: float, kappa: float, strict: bool) -> None:
    if not (f > 0.0 and F > 0.0):
        raise DomainError(f"need f > 0 and F > 0, got f={f!r}, F={F!r}", constraint="f > 0, F > 0", value=(f, F))
    floor = _kappa_floor(E, f, F)
    slack = 1e-12 * max(floor, 1.0)
    inside = floor < kappa < 1.0 if strict else floor - slack <= kappa <= 1.0
    if not inside:
        raise DomainError(
            f"kappa={kappa!r} outside [{floor!r}, 1]",
            constraint="(f^p/F)^(1/(p-1)) <= kappa <= 1",
            value=kappa,
        )


def g_of_kappa(E: Exponents, f: float, F: float, kappa: float) -> float:
    """
    g(kappa) = kappa^(q-1) H_q(omega_p(f^p / (kappa^(p-1) F))).

    Strictly increasing from (f^p/F)^((q-1)/(p-1)) at the left end of its bracket to
    H_q(omega_p(f^p/F)) at kappa = 1.

    Args:
        E (Exponents): The exponent pair.
        f (float): First moment.
        F (float): p-th moment.
        kappa (float): Mass in [(f^p/F)^(1/(p-1)), 1].

    Returns:
        float: g(kappa).
    """
    _check_kappa(E, f, F, kappa, strict=False)
    return float(_g(E, f, F, np.asarray(kappa, dtype=float)))


def g_prime(E: Exponents, f: float, F: float, kappa: float) -> float:
    """g'(kappa) = ((q-1)(p-q)/p) kappa^(q-2) omega_p(f^p / (kappa^(p-1) F))^q."""
    _check_kappa(E, f, F, kappa, strict=True)
    return float(_g_prime(E, f, F, np.asarray(kappa, dtype=float)))


def solve_kappa(E: Exponents, f: float, A: float, F: float, tol: float = 1e-12) -> float:
    """
    The unique mass kappa in ((f^q/A)^(1/(q-1)), 1) with
    omega_q(f^q / (kappa^(q-1) A)) = omega_p(f^p / (kappa^(p-1) F)).

    Args:
        E (Exponents): The exponent pair.
        f (float): First moment.
        A (float): q-th moment.
        F (float): p-th moment.
        tol (float): Residual tolerance on g(kappa) - f^q/A.

    Returns:
        float: kappa.

    Raises:
        DegenerateMomentsError: if A = f^q.
        DomainError: if the unit-mass moment condition fails.
        PreconditionError: if omega_q(f^q/A) <= omega_p(f^p/F), when no such kappa exists.
        ConvergenceError: if the solve runs out of iterations.
    """
    M = check_moments(E, MomentData(f=f, A=A, F=F))
    target = M.f ** E.q / M.A
    left = float(omega_values(E.q, target))
    right = float(omega_values(E.p, M.f ** E.p / M.F))
    if not left > right:
        raise PreconditionError(
            f"omega_q(f^q/A)={left!r} does not exceed omega_p(f^p/F)={right!r}; no matching mass exists",
            constraint="omega_q(f^q/A) > omega_p(f^p/F)",
            value=(left, right),
        )

    lo = target ** (1.0 / (E.q - 1.0))
    result = bracketed_root(
        lambda k: _g(E, M.f, M.F, k) - target,
        lo,
        1.0,
        dfunc=lambda k: _g_prime(E, M.f, M.F, k),
        tol=tol,
    ).scalar()
    logger.debug("solve_kappa: kappa=%r after %d iterations (residual %r)", result.root, result.iterations, result.residual)
    return result.root


def plant_moments(E: Exponents, kappa: float, gamma: float, f: float = 1.0) -> MomentData:
    """
    Moments of mass 1 whose matching mass is kappa.

    The pair s1 = H_p(gamma), s2 = H_q(gamma) satisfies omega_p(s1) = omega_q(s2) = gamma, and the
    moments are chosen so that they map to (s1, s2) at mass kappa.

    Args:
        E (Exponents): The exponent pair.
        kappa (float): Planted mass in (0, 1).
        gamma (float): Common omega value in (1, p/(p-1)).
        f (float): First moment.

    Returns:
        MomentData: (f, A, F) with kappa = 1.
    """
    if not 0.0 < kappa < 1.0:
        raise DomainError(f"kappa must lie in (0, 1), got {kappa!r}", constraint="0 < kappa < 1", value=kappa)
    if not 1.0 < gamma < E.p_conjugate:
        raise DomainError(
            f"gamma must lie in (1, p/(p-1)), got {gamma!r}", constraint="1 < gamma < p/(p-1)", value=gamma
        )
    s1 = h_function(E.p, gamma)
    s2 = h_function(E.q, gamma)
    F = f ** E.p / (kappa ** (E.p - 1.0) * s1)
    A = f ** E.q / (kappa ** (E.q - 1.0) * s2)
    return MomentData(f=f, A=A, F=F)
