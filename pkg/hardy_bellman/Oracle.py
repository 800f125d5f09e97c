import logging
from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.optimize import minimize

from hardy_bellman.errors import DomainError, InfeasibleError
from hardy_bellman.StepFunction import geometric_edges, hardy_integral_and_gradient, uniform_edges
from hardy_bellman.utils import write_log

logger = logging.getLogger("hardy_bellman.Oracle")

FEASIBILITY_TOL = 1e-6
BOUND_RTOL = 1e-6
OUTER_TOL = 1e-7
MAX_OUTER = 40
INNER_ITER = 500
_LOG_CLIP = 700.0
_MAX_STEP = 5.0


class OracleReport(BaseModel):
    """
    Best candidate found by an oracle run.

    best_ratio and bound are values of the Hardy functional (not divided by the p-th moment);
    the normalized fields divide both by the target p-th moment.
    """

    model_config = ConfigDict(frozen=True)

    name: str
    best_ratio: float
    bound: float
    gap: float
    normalized_best: float
    normalized_bound: float
    constraint_residuals: List[float]
    violation: bool
    trials: int
    feasible_trials: int
    seed: int
    n: int
    grid: str
    best_edges: List[float]
    best_values: List[float]


class Candidate:
    def __init__(self, values: np.ndarray, functional: float, residuals: np.ndarray) -> None:
        self.values = values
        self.functional = functional
        self.residuals = residuals

    @property
    def feasible(self) -> bool:
        return bool(np.all(np.isfinite(self.residuals)) and np.max(np.abs(self.residuals)) <= FEASIBILITY_TOL)


def _values_from(z: np.ndarray) -> np.ndarray:
    # z = (x_n, e_1, ..., e_{n-1}); x_i = x_n + sum_{k >= i} e_k keeps log v non-increasing
    x = z[0] + np.concatenate((np.cumsum(z[1:][::-1])[::-1], [0.0]))
    return np.exp(np.clip(x, -_LOG_CLIP, _LOG_CLIP))


def _z_from(values: np.ndarray) -> np.ndarray:
    x = np.log(values)
    return np.concatenate(([x[-1]], np.maximum(x[:-1] - x[1:], 0.0)))


def _chain(grad_x: np.ndarray) -> np.ndarray:
    # d/dx_n collects every x_i; d/de_k collects x_1..x_k
    return np.concatenate(([np.sum(grad_x)], np.cumsum(grad_x)[:-1]))


class Oracle(ABC):
    def __init__(self, name: str, p: float, kappa: float = 1.0, **kwargs: Any) -> None:
        """
        Search non-increasing step functions on (0, kappa] that maximise the Hardy functional
        under equality constraints on some of their moments.

        Args:
            name (str): Name recorded in the report.
            p (float): Exponent of the Hardy functional.
            kappa (float): Length of the support.
            **kwargs (Any): Search options: max_outer, inner_iter, outer_tol, span.
        """
        if not p > 1.0:
            raise DomainError(f"p must exceed 1, got {p!r}", constraint="p > 1", value=p)
        self.name = name
        self.p = p
        self.kappa = kappa
        self.kwargs: Dict[str, Any] = kwargs

    @abstractmethod
    def targets(self) -> List[Tuple[float, float]]:
        """
        The moment constraints.

        Returns:
            List[Tuple[float, float]]: (exponent r, target) pairs meaning integral of v^r = target.
        """
        return []

    @abstractmethod
    def bound(self) -> float:
        """The claimed upper bound of the Hardy functional under the constraints."""
        return 0.0

    @abstractmethod
    def initial_values(self, edges: np.ndarray, rng: np.random.Generator, trial: int) -> np.ndarray:
        """A strictly positive non-increasing starting profile for one trial."""
        return np.ones(edges.size - 1)

    def constant_candidate(self) -> Optional[np.ndarray]:
        """A closed-form optimiser, when the constraints force one."""
        return None

    def edges(self, n: int, grid: str) -> np.ndarray:
        if grid == "uniform":
            return uniform_edges(n, self.kappa)
        if grid == "geometric":
            return geometric_edges(n, self.kappa, self.kwargs.get("span", 40.0))
        raise DomainError(f"grid must be 'uniform' or 'geometric', got {grid!r}", constraint="grid", value=grid)

    def _residuals(self, values: np.ndarray, widths: np.ndarray) -> np.ndarray:
        return np.array([np.sum(values ** r * widths) / target - 1.0 for r, target in self.targets()])

    def search(self, edges: np.ndarray, start: np.ndarray) -> Candidate:
        """
        Augmented Lagrangian ascent from one starting profile.

        Each outer round minimises -J/F + lambda.c + (mu/2)|c|^2 with L-BFGS-B over the log-increment
        variables, then updates lambda <- lambda + mu c and multiplies mu by 10 unless |c| shrank 4x.
        """
        widths = np.diff(edges)
        targets = self.targets()
        scale = targets[-1][1]
        p = self.p
        lam = np.zeros(len(targets))
        mu = 10.0
        z = _z_from(start)
        bounds = [(-_LOG_CLIP / 2.0, _LOG_CLIP / 2.0)] + [(0.0, _MAX_STEP)] * (z.size - 1)
        max_outer = self.kwargs.get("max_outer", MAX_OUTER)
        inner_iter = self.kwargs.get("inner_iter", INNER_ITER)
        outer_tol = self.kwargs.get("outer_tol", OUTER_TOL)

        def lagrangian(z_: np.ndarray) -> Tuple[float, np.ndarray]:
            v = _values_from(z_)
            J, dJ = hardy_integral_and_gradient(edges, v, p)
            value = -J / scale
            grad_v = -dJ / scale
            for k, (r, target) in enumerate(targets):
                c = np.sum(v ** r * widths) / target - 1.0
                weight = lam[k] + mu * c
                value += lam[k] * c + 0.5 * mu * c * c
                grad_v = grad_v + weight * r * v ** (r - 1.0) * widths / target
            return float(value), _chain(grad_v * v)

        previous = np.inf
        for _ in range(max_outer):
            with np.errstate(over="ignore", invalid="ignore"):
                result = minimize(lagrangian, z, jac=True, method="L-BFGS-B", bounds=bounds, options={"maxiter": inner_iter})
            if np.all(np.isfinite(result.x)):
                z = result.x
            c = self._residuals(_values_from(z), widths)
            norm = float(np.max(np.abs(c)))
            if norm < outer_tol:
                break
            lam = lam + mu * c
            if norm > previous / 4.0:
                mu *= 10.0
            previous = norm

        values = _values_from(z)
        J, _ = hardy_integral_and_gradient(edges, values, p)
        return Candidate(values, float(J), self._residuals(values, widths))

    def _trial(self, edges: np.ndarray, seed_sequence: np.random.SeedSequence, trial: int) -> Candidate:
        rng = np.random.Generator(np.random.Philox(seed_sequence))
        start = self.initial_values(edges, rng, trial)
        return self.search(edges, start)

    def run(
        self,
        n: int,
        trials: int,
        seed: int,
        grid: str = "geometric",
        workers: Optional[int] = None,
        log: bool = True,
    ) -> OracleReport:
        """
        Run independent trials and report the best feasible candidate.

        Args:
            n (int): Number of cells.
            trials (int): Number of starting profiles.
            seed (int): Master seed; trial k draws from the k-th spawned stream.
            grid (str): "geometric" or "uniform" cell edges.
            workers (int, optional): Thread pool size for the trials.
            log (bool): Emit progress through the module logger.

        Returns:
            OracleReport: the best feasible candidate against the bound.

        Raises:
            InfeasibleError: if no trial meets the constraints within FEASIBILITY_TOL.
        """
        if not (isinstance(trials, int) and trials >= 1):
            raise DomainError(f"trials must be a positive integer, got {trials!r}", constraint="trials >= 1", value=trials)
        bound = self.bound()
        constant = self.constant_candidate()
        if constant is not None:
            edges = np.array([0.0, self.kappa])
            J, _ = hardy_integral_and_gradient(edges, constant, self.p)
            candidates: Sequence[Candidate] = [Candidate(constant, float(J), self._residuals(constant, np.diff(edges)))]
            trials = 1
        else:
            edges = self.edges(n, grid)
            streams = np.random.SeedSequence(seed).spawn(trials)
            write_log(log, logger, f"{self.name}: {trials} trials on {n} {grid} cells (seed {seed})", "INFO")
            if workers and workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    candidates = list(pool.map(lambda k: self._trial(edges, streams[k], k), range(trials)))
            else:
                candidates = [self._trial(edges, streams[k], k) for k in range(trials)]

        feasible = [c for c in candidates if c.feasible]
        for k, candidate in enumerate(candidates):
            write_log(
                log,
                logger,
                f"{self.name} trial {k}: functional={candidate.functional!r} "
                f"residual={float(np.max(np.abs(candidate.residuals)))!r}",
                "DEBUG",
            )
        if not feasible:
            worst = min(float(np.max(np.abs(c.residuals))) for c in candidates)
            raise InfeasibleError(
                f"{self.name}: none of {trials} trials met the moment constraints (best residual {worst!r})"
            )
        best = max(feasible, key=lambda c: c.functional)
        target_p = self.targets()[-1][1]
        violation = best.functional > bound * (1.0 + BOUND_RTOL)
        if violation:
            logger.warning("%s: functional %r exceeds bound %r", self.name, best.functional, bound)
        return OracleReport(
            name=self.name,
            best_ratio=best.functional,
            bound=bound,
            gap=bound - best.functional,
            normalized_best=best.functional / target_p,
            normalized_bound=bound / target_p,
            constraint_residuals=[float(c) for c in best.residuals],
            violation=violation,
            trials=trials,
            feasible_trials=len(feasible),
            seed=seed,
            n=int(best.values.size),
            grid=grid if constant is None else "constant",
            best_edges=edges.tolist(),
            best_values=best.values.tolist(),
        )


def power_profile(edges: np.ndarray, exponent: float, mass: float) -> np.ndarray:
    """Cell averages of C t^(-exponent), with C chosen so the integral equals mass."""
    lifted = edges ** (1.0 - exponent)
    values = np.diff(lifted) / ((1.0 - exponent) * np.diff(edges))
    return values * mass / np.sum(values * np.diff(edges))


def random_profile(edges: np.ndarray, rng: np.random.Generator, p: float, mass: float) -> np.ndarray:
    """
    A random power profile times sorted heavy-tailed (Pareto) multipliers, scaled to the given mass.

    Both factors are non-increasing, so the product is too.
    """
    exponent = rng.uniform(0.0, 0.95 / p)
    multipliers = np.minimum(np.sort(rng.pareto(1.5, edges.size - 1) + 1.0)[::-1], 1e3)
    values = power_profile(edges, exponent, 1.0) * multipliers
    return values * mass / np.sum(values * np.diff(edges))
