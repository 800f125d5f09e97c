"""
Randomised property checks of the special functions, the mass solver, the sharp constant and the
region curves, collected in a registry and run per exponent preset.
"""
import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict

from hardy_bellman import Domain, RegionAtlas, SharpConstant, SpecialFunctions
from hardy_bellman.errors import HardyBellmanError, PreconditionError
from hardy_bellman.Exponents import PRESETS, Exponents
from hardy_bellman.utils import central_difference, write_log

logger = logging.getLogger("hardy_bellman.LemmaSuite")

Counterexample = Optional[Dict[str, Any]]
CheckFunc = Callable[[Exponents, np.random.Generator, int], Counterexample]


class PropertyCheck:
    def __init__(self, name: str, description: str, func: CheckFunc, sample_share: float = 1.0) -> None:
        """
        A named randomised property.

        Args:
            name (str): Registry key.
            description (str): One line shown in reports.
            func (CheckFunc): Called with (exponents, generator, samples); returns None when the
                property holds, otherwise the first counterexample found.
            sample_share (float): Fraction of the suite sample count this check draws.
        """
        self.name = name
        self.description = description
        self.func = func
        self.sample_share = sample_share


class CheckResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    name: str
    preset: str
    passed: bool
    samples: int
    counterexample: Optional[Dict[str, Any]] = None
    message: str = ""


class SuiteReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int
    samples: int
    results: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)

    def failures(self) -> List[CheckResult]:
        return [result for result in self.results if not result.passed]


class LemmaSuite:
    def __init__(self, log: bool = True) -> None:
        self.log = log
        self.checks: List[PropertyCheck] = []

    def add_check(self, check: PropertyCheck) -> None:
        """
        Register a check; a second check with the same name is ignored.

        Args:
            check (PropertyCheck): The check to add.
        """
        if not isinstance(check, PropertyCheck):
            raise ValueError("Only PropertyCheck instances can be added")
        _, existing = self.get_check(check.name)
        if not existing:
            self.checks.append(check)

    def get_check(self, name: str) -> Tuple[Optional[int], Optional[PropertyCheck]]:
        for index, check in enumerate(self.checks):
            if check.name == name:
                return index, check
        return None, None

    def run_check(self, name: str, E: Exponents, samples: int, seed: int, preset: str = "") -> CheckResult:
        """
        Run one registered check with its own deterministic stream.

        Args:
            name (str): Registered check name.
            E (Exponents): The exponent pair.
            samples (int): Suite sample count, scaled by the check's share.
            seed (int): Master seed.
            preset (str): Label recorded in the result.

        Returns:
            CheckResult: pass/fail with the counterexample on failure.
        """
        index, check = self.get_check(name)
        if check is None:
            raise ValueError(f"No check found with name: {name}")
        count = max(1, int(round(samples * check.sample_share)))
        stream = np.random.SeedSequence([seed, index, int(round(E.p * 1000)), int(round(E.q * 1000))])
        rng = np.random.Generator(np.random.Philox(stream))
        label = preset or E.key()
        try:
            counterexample = check.func(E, rng, count)
        except HardyBellmanError as error:
            counterexample = {"error": type(error).__name__}
            message = str(error)
        else:
            message = "" if counterexample is None else check.description
        passed = counterexample is None
        write_log(self.log, logger, f"{name} [{label}]: {'pass' if passed else 'FAIL'}", "INFO" if passed else "WARNING")
        return CheckResult(
            name=name,
            preset=label,
            passed=passed,
            samples=count,
            counterexample=counterexample,
            message=message,
        )

    def run_all(self, presets: Sequence[str], samples: int, seed: int) -> SuiteReport:
        """Run every registered check for every named preset, in registration order."""
        results = []
        for preset in presets:
            if preset not in PRESETS:
                raise ValueError(f"Unknown preset {preset!r}; choose from {sorted(PRESETS)}")
            for check in self.checks:
                results.append(self.run_check(check.name, PRESETS[preset], samples, seed, preset))
        return SuiteReport(seed=seed, samples=samples, results=results)


def _point_in_d(E: Exponents, rng: np.random.Generator) -> Domain.SPoint:
    s1 = rng.uniform(0.01, 0.99)
    lower = s1 ** E.slope
    s2 = rng.uniform(lower + 1e-9 * (1.0 - lower), 1.0 - 1e-9)
    return Domain.validate_spoint(E, s1, s2)


def _matched_gamma(E: Exponents, rng: np.random.Generator, samples: int) -> np.ndarray:
    top = E.p_conjugate
    return 1.0 + (top - 1.0) * rng.uniform(0.01, 0.99, samples)


def check_omega_round_trip(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    r = rng.uniform(1.05, 6.0, samples)
    s = rng.uniform(-50.0, 1.0, samples)
    for r_k, s_k in zip(r, s):
        w = SpecialFunctions.omega_values(float(r_k), float(s_k))
        residual = abs(SpecialFunctions.h_function(float(r_k), w) - s_k)
        if residual > 1e-10 * max(1.0, abs(s_k)):
            return {"r": float(r_k), "s": float(s_k), "omega": w, "residual": residual}
    return None


def check_matched_points(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for gamma in _matched_gamma(E, rng, samples):
        gamma = float(gamma)
        s1 = SpecialFunctions.h_function(E.p, gamma)
        s2 = SpecialFunctions.h_function(E.q, gamma)
        P = Domain.validate_spoint(E, s1, s2)
        value = SharpConstant.f_obstruction(E, P, gamma)
        result = SharpConstant.sharp_t(E, P)
        if abs(value) > 1e-9 or abs(result.t - gamma) > 1e-8 or not gamma < result.t0:
            return {"gamma": gamma, "s1": s1, "s2": s2, "F": value, "t": result.t, "t0": result.t0}
    return None


def check_omega_power_limit(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for ell in (-0.5, -1.0, -2.0):
        limit = -ell / (E.p - 1.0)
        errors = [abs(SpecialFunctions.omega_power_limit(E, ell, 10.0 ** -k) - limit) for k in range(1, 6)]
        if any(later >= earlier for earlier, later in zip(errors, errors[1:])):
            return {"ell": ell, "errors": errors}
        close = SpecialFunctions.omega_power_limit(E, ell, 1e-8)
        if abs(close - limit) > 0.01 * limit:
            return {"ell": ell, "alpha": 1e-8, "value": close, "limit": limit}
    return None


def check_omega_gap(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    lam = np.arange(1000) / 1000.0
    gap = np.asarray(SpecialFunctions.omega_gap(E, lam))
    bad = np.flatnonzero(~(gap > 0.0))
    if bad.size:
        k = int(bad[0])
        return {"lambda": float(lam[k]), "gap": float(gap[k])}
    return None


def check_kappa_round_trip(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for _ in range(samples):
        kappa = float(rng.uniform(0.2, 0.95))
        gamma = float(_matched_gamma(E, rng, 1)[0])
        M = Domain.plant_moments(E, kappa, gamma)
        found = Domain.solve_kappa(E, M.f, M.A, M.F)
        if abs(found - kappa) > 1e-8:
            return {"kappa": kappa, "gamma": gamma, "found": found}
    return None


def check_kappa_duality(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for _ in range(samples):
        f = 1.0
        F = float(rng.uniform(1.2, 5.0))
        lower = f ** E.q
        upper = f ** ((E.p - E.q) / (E.p - 1.0)) * F ** E.slope
        A = float(lower + (upper - lower) * rng.uniform(0.05, 0.95))
        hypothesis = SpecialFunctions.omega_values(E.q, f ** E.q / A) > SpecialFunctions.omega_values(E.p, f ** E.p / F)
        try:
            kappa = Domain.solve_kappa(E, f, A, F)
        except PreconditionError:
            if hypothesis:
                return {"f": f, "A": A, "F": F, "hypothesis": True, "solved": False}
            continue
        if not hypothesis:
            return {"f": f, "A": A, "F": F, "hypothesis": False, "solved": True}
        s1 = f ** E.p / (kappa ** (E.p - 1.0) * F)
        s2 = f ** E.q / (kappa ** (E.q - 1.0) * A)
        gap = abs(SpecialFunctions.omega_values(E.q, s2) - SpecialFunctions.omega_values(E.p, s1))
        if gap > 1e-8:
            return {"f": f, "A": A, "F": F, "kappa": kappa, "omega_gap": gap}
    return None


def check_g_monotone(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for _ in range(samples):
        F = float(rng.uniform(1.2, 5.0))
        floor = (1.0 / F) ** (1.0 / (E.p - 1.0))
        k1, k2 = np.sort(rng.uniform(floor, 1.0, 2))
        k1, k2 = float(k1), float(k2)
        if not Domain.g_of_kappa(E, 1.0, F, k1) < Domain.g_of_kappa(E, 1.0, F, k2):
            return {"F": F, "kappa1": k1, "kappa2": k2}
        mid = 0.5 * (k1 + k2)
        slope = Domain.g_prime(E, 1.0, F, mid)
        step = 1e-6 * min(mid - floor, 1.0 - mid, mid)
        estimate = central_difference(lambda k: Domain.g_of_kappa(E, 1.0, F, k), mid, step)
        if not slope > 0.0 or abs(estimate - slope) > 1e-6 * abs(slope):
            return {"F": F, "kappa": mid, "g_prime": slope, "difference": estimate}
    return None


def check_t0_round_trip(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for _ in range(samples):
        P = _point_in_d(E, rng)
        t0 = SharpConstant.solve_t0(E, P)
        residual = abs(SharpConstant.phi(E, t0) - SharpConstant.h_bilinear(E, P))
        tau_end = SharpConstant.tau(E, P, t0)
        if residual > 1e-11 or abs(tau_end - 1.0) > 1e-9 or not 1.0 < t0 <= E.y0 * (1.0 + 1e-12):
            return {"s1": P.s1, "s2": P.s2, "t0": t0, "residual": residual, "tau_t0": tau_end}
    return None


def check_sharp_t_branches(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for _ in range(samples):
        P = _point_in_d(E, rng)
        result = SharpConstant.sharp_t(E, P)
        dump = {"s1": P.s1, "s2": P.s2, "t": result.t, "t0": result.t0, "branch": result.branch.value}
        if not 1.0 <= result.t <= result.t0 <= E.y0 * (1.0 + 1e-12):
            return dump
        if result.tprime0_sign is SharpConstant.Sign.POS and (
            result.branch is not SharpConstant.Branch.T0_BRANCH or result.t != result.t0
        ):
            return dump
        # a bracket-limited F solve sits within ulps of the root, where |F| is about sqrt(eps)
        limit = 1e-6 if result.bracket_limited else 1e-9
        if result.branch is SharpConstant.Branch.F_ROOT_BRANCH and result.residual_F > limit:
            return dump
    return None


def _sign_points(E: Exponents, rng: np.random.Generator, samples: int) -> List[Domain.SPoint]:
    points = [_point_in_d(E, rng) for _ in range(samples - samples // 2)]
    s1 = rng.uniform(0.3, 0.99, samples // 2)
    threshold = np.asarray(RegionAtlas.s2_double_prime_values(E, s1))
    side = rng.choice([-1.0, 1.0], s1.size)
    s2 = threshold * (1.0 + side * rng.uniform(1e-4, 0.05, s1.size))
    for a, b in zip(s1, s2):
        a, b = float(a), float(b)
        if a ** (E.q - 1.0) < b ** (E.p - 1.0) and b < 1.0:
            points.append(Domain.validate_spoint(E, a, b))
    return points


def check_sign_equivalence(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    points = _sign_points(E, rng, samples)
    threshold = np.asarray(RegionAtlas.s2_double_prime_values(E, np.array([P.s1 for P in points])))
    for P, s2pp in zip(points, threshold):
        if abs(P.s2 - s2pp) <= 1e-6 * s2pp:
            continue
        sign = SharpConstant.tprime0_sign(E, P)
        if sign is SharpConstant.Sign.ZERO:
            continue
        if (sign is SharpConstant.Sign.NEG) != (P.s2 > s2pp):
            return {"s1": P.s1, "s2": P.s2, "s2_double_prime": float(s2pp), "sign": sign.value}
    return None


def check_theta_shape(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    delta = RegionAtlas.solve_delta(E)
    grid = np.arange(1, 512) / 512.0
    values = np.asarray(RegionAtlas.theta(E, grid))
    away = np.abs(grid - delta) > 1e-9
    wrong = away & ((grid < delta) & (values >= 0.0) | (grid > delta) & (values <= 0.0))
    if np.any(wrong):
        k = int(np.flatnonzero(wrong)[0])
        return {"delta": delta, "s1": float(grid[k]), "theta": float(values[k])}
    second = values[:-2] - 2.0 * values[1:-1] + values[2:]
    if np.any(second >= 0.0):
        k = int(np.flatnonzero(second >= 0.0)[0])
        return {"delta": delta, "s1": float(grid[k + 1]), "second_difference": float(second[k])}
    return None


def check_s2_prime_curve(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    delta = RegionAtlas.solve_delta(E)
    for s1 in rng.uniform(delta, 1.0 - 1e-4, samples):
        s1 = float(s1)
        s2p = RegionAtlas.s2_prime_of(E, s1)
        P = Domain.validate_spoint(E, s1, s2p)
        target = SharpConstant.phi(E, SpecialFunctions.omega_values(E.p, s1))
        on_curve = abs(SharpConstant.h_bilinear(E, P) - target)
        t0_gap = abs(SharpConstant.solve_t0(E, P) - SpecialFunctions.omega_values(E.p, s1))
        sandwich = s1 - E.ratio * s1 ** ((E.p - E.q) / (E.p - 1.0)) < target < -E.q / (E.p - E.q) * s1
        s2pp = RegionAtlas.s2_double_prime(E, s1)
        if on_curve > 1e-10 or t0_gap > 1e-8 or not sandwich or s2pp > s2p + 1e-9:
            return {
                "s1": s1,
                "s2_prime": s2p,
                "s2_double_prime": s2pp,
                "curve_residual": on_curve,
                "t0_gap": t0_gap,
                "sandwich": bool(sandwich),
            }
    return None


def check_x_region(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    s1 = rng.uniform(0.05, 0.999, 4 * samples)
    threshold = np.asarray(RegionAtlas.s2_double_prime_values(E, s1))
    lower = s1 ** E.slope
    open_fibers = np.flatnonzero(threshold > lower * (1.0 + 1e-6))
    if open_fibers.size == 0:
        return {"x_region": "empty on all sampled fibers"}
    for k in open_fibers[:samples]:
        a = float(s1[k])
        b = float(lower[k] + (threshold[k] - lower[k]) * rng.uniform(0.1, 0.9))
        P = Domain.validate_spoint(E, a, b)
        report = RegionAtlas.classify(E, P)
        result = SharpConstant.sharp_t(E, P)
        d_s1, d_s2 = SharpConstant.t0_gradient(E, P)
        step = 1e-7
        fd_s2 = central_difference(
            lambda s: SharpConstant.solve_t0(E, Domain.validate_spoint(E, a, s)), b, min(step, 0.5 * (b - lower[k]))
        )
        if (
            report.x_region is not RegionAtlas.XTag.X_REGION
            or result.branch is not SharpConstant.Branch.T0_BRANCH
            or not result.t0 < report.comparisons.omega_p
            or not (d_s1 < 0.0 < d_s2)
            or not fd_s2 > 0.0
        ):
            return {
                "s1": a,
                "s2": b,
                "x_region": report.x_region.value,
                "branch": result.branch.value,
                "t0": result.t0,
                "omega_p": report.comparisons.omega_p,
                "dt0_ds1": d_s1,
                "dt0_ds2": d_s2,
            }
    return None


def check_theorem_items(E: Exponents, rng: np.random.Generator, samples: int) -> Counterexample:
    for _ in range(samples):
        P = _point_in_d(E, rng)
        report = RegionAtlas.classify(E, P)
        relation = report.comparisons.omega_p_vs_t0
        expected = {
            RegionAtlas.TheoremTag.BELOW_DELTA: "<",
            RegionAtlas.TheoremTag.ABOVE_S2PRIME: "<",
            RegionAtlas.TheoremTag.BETWEEN: ">",
        }.get(report.theorem)
        if expected is not None and relation not in (expected, "="):
            return {"s1": P.s1, "s2": P.s2, "theorem": report.theorem.value, "omega_p_vs_t0": relation}
    return None


def default_suite(log: bool = True) -> LemmaSuite:
    """Every property check, in the order the report lists them."""
    suite = LemmaSuite(log=log)
    for check in (
        PropertyCheck("omega_round_trip", "H_r(omega_r(s)) differs from s", check_omega_round_trip, 1.0),
        PropertyCheck("omega_power_limit", "alpha omega_p(ell/alpha)^p does not approach -ell/(p-1)", check_omega_power_limit),
        PropertyCheck("omega_gap", "omega_q(lambda^(q-1)) <= omega_p(lambda^(p-1))", check_omega_gap),
        PropertyCheck("g_monotone", "g is not increasing or g' disagrees with differences", check_g_monotone, 0.1),
        PropertyCheck("kappa_round_trip", "planted mass not recovered", check_kappa_round_trip, 0.1),
        PropertyCheck("kappa_duality", "mass solver disagrees with the omega comparison", check_kappa_duality, 0.1),
        PropertyCheck("matched_points", "F or t wrong at a matched point", check_matched_points, 1.0),
        PropertyCheck("t0_round_trip", "phi(t0) != h or tau(t0) != 1", check_t0_round_trip, 1.0),
        PropertyCheck("sharp_t_branches", "sharp_t breaks its branch contract", check_sharp_t_branches, 0.2),
        PropertyCheck("sign_equivalence", "t'(0) < 0 does not match s2 > s2''", check_sign_equivalence, 1.0),
        PropertyCheck("theta_shape", "theta sign pattern or concavity fails", check_theta_shape),
        PropertyCheck("s2_prime_curve", "s2' curve identities fail", check_s2_prime_curve, 0.2),
        PropertyCheck("theorem_items", "omega_p(s1) vs t0 disagrees with the region", check_theorem_items, 0.2),
        PropertyCheck("x_region", "X is empty or misclassified", check_x_region, 0.05),
    ):
        suite.add_check(check)
    return suite
