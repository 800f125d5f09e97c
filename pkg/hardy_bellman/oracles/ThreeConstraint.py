from typing import Any, List, Optional, Tuple

import numpy as np

from hardy_bellman.Domain import MomentData, moments_to_spoint
from hardy_bellman.Exponents import Exponents
from hardy_bellman.Oracle import Oracle, OracleReport, power_profile, random_profile
from hardy_bellman.SharpConstant import SharpResult, sharp_t


class ThreeConstraintOracle(Oracle):
    def __init__(self, E: Exponents, M: MomentData, **kwargs: Any) -> None:
        """
        Maximise the Hardy functional on (0, kappa] with integral f, q-th moment A and p-th moment F.

        Args:
            E (Exponents): The exponent pair.
            M (MomentData): Target moments and mass kappa.
            **kwargs (Any): Search options passed to Oracle.
        """
        super().__init__("three-constraint", E.p, M.kappa, **kwargs)
        self.E = E
        self.M = M
        self.point = moments_to_spoint(E, M)
        self.sharp: SharpResult = sharp_t(E, self.point)

    def targets(self) -> List[Tuple[float, float]]:
        return [(1.0, self.M.f), (self.E.q, self.M.A), (self.E.p, self.M.F)]

    def bound(self) -> float:
        """t(s1, s2)^p times the p-th moment."""
        return self.sharp.t ** self.E.p * self.M.F

    def initial_values(self, edges: np.ndarray, rng: np.random.Generator, trial: int) -> np.ndarray:
        if trial == 0:
            exponent = min(1.0 - 1.0 / self.sharp.t, 0.95 / self.E.p)
            return power_profile(edges, exponent, self.M.f)
        return random_profile(edges, rng, self.E.p, self.M.f)


def maximize_three_constraints(
    E: Exponents,
    M: MomentData,
    n: int,
    trials: int,
    seed: int,
    grid: str = "geometric",
    workers: Optional[int] = None,
    log: bool = True,
    **kwargs: Any,
) -> OracleReport:
    """
    Best Hardy functional over non-increasing step functions on (0, kappa] matching (f, A, F).

    The bound of the report is t(s1, s2)^p F with (s1, s2) = moments_to_spoint(E, M).
    """
    oracle = ThreeConstraintOracle(E, M, **kwargs)
    return oracle.run(n, trials, seed, grid=grid, workers=workers, log=log)
