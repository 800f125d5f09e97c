from typing import Any, List, Optional, Tuple

import numpy as np

from hardy_bellman.errors import DomainError
from hardy_bellman.Oracle import Oracle, OracleReport, power_profile, random_profile
from hardy_bellman.SpecialFunctions import omega_values


class TwoConstraintOracle(Oracle):
    def __init__(self, p: float, f: float, F: float, **kwargs: Any) -> None:
        """
        Maximise the Hardy functional on (0, 1] under integral = f and p-th moment = F.

        Args:
            p (float): Exponent > 1.
            f (float): First moment.
            F (float): p-th moment, at least f^p.
            **kwargs (Any): Search options passed to Oracle.
        """
        super().__init__("two-constraint", p, 1.0, **kwargs)
        if not (f > 0.0 and F > 0.0):
            raise DomainError(f"need f > 0 and F > 0, got f={f!r}, F={F!r}", constraint="f > 0, F > 0", value=(f, F))
        if F < f ** p * (1.0 - 1e-15):
            raise DomainError(f"need f^p <= F, got f^p={f ** p!r}, F={F!r}", constraint="f^p <= F", value=(f, F))
        self.f = f
        self.F = F

    def targets(self) -> List[Tuple[float, float]]:
        return [(1.0, self.f), (self.p, self.F)]

    def omega(self) -> float:
        return float(omega_values(self.p, min(self.f ** self.p / self.F, 1.0)))

    def bound(self) -> float:
        """F omega_p(f^p/F)^p, the two-variable Bellman value."""
        return self.F * self.omega() ** self.p

    def constant_candidate(self) -> Optional[np.ndarray]:
        if abs(self.F - self.f ** self.p) <= 1e-15 * self.F:
            return np.array([self.f])
        return None

    def initial_values(self, edges: np.ndarray, rng: np.random.Generator, trial: int) -> np.ndarray:
        if trial == 0:
            # extremals behave like t^(-(1 - 1/omega))
            return power_profile(edges, 1.0 - 1.0 / self.omega(), self.f)
        return random_profile(edges, rng, self.p, self.f)


def maximize_two_constraints(
    p: float,
    f: float,
    F: float,
    n: int,
    trials: int,
    seed: int,
    grid: str = "geometric",
    workers: Optional[int] = None,
    log: bool = True,
    **kwargs: Any,
) -> OracleReport:
    """
    Best Hardy functional over non-increasing step functions with integral f and p-th moment F.

    The bound of the report is F omega_p(f^p/F)^p; F = f^p returns the constant function.
    """
    oracle = TwoConstraintOracle(p, f, F, **kwargs)
    return oracle.run(n, trials, seed, grid=grid, workers=workers, log=log)
