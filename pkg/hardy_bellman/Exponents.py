import math
from typing import Dict

from pydantic import BaseModel, ConfigDict, model_validator


class Exponents(BaseModel):
    """
    The exponent pair (p, q) with 1 < q < p carried by every computation.
    """

    model_config = ConfigDict(frozen=True)

    p: float
    q: float

    @model_validator(mode="after")
    def _check_order(self) -> "Exponents":
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ValueError(f"exponents must be finite, got p={self.p}, q={self.q}")
        if not 1.0 < self.q < self.p:
            raise ValueError(f"exponents must satisfy 1 < q < p, got p={self.p}, q={self.q}")
        return self

    @property
    def p_conjugate(self) -> float:
        """p/(p-1), the value of omega_p at 0."""
        return self.p / (self.p - 1.0)

    @property
    def q_conjugate(self) -> float:
        """q/(q-1), the value of omega_q at 0."""
        return self.q / (self.q - 1.0)

    @property
    def ratio(self) -> float:
        """p/(p-q)."""
        return self.p / (self.p - self.q)

    @property
    def slope(self) -> float:
        """(q-1)/(p-1), the exponent of the lower boundary curve of D."""
        return (self.q - 1.0) / (self.p - 1.0)

    @property
    def y0(self) -> float:
        """(p/(p-q))^(1/q), the positive zero of phi."""
        return self.ratio ** (1.0 / self.q)

    def key(self) -> str:
        return f"p{self.p:g}q{self.q:g}"


PRESETS: Dict[str, Exponents] = {
    "p2q1.5": Exponents(p=2.0, q=1.5),
    "p3q2": Exponents(p=3.0, q=2.0),
    "p1.5q1.2": Exponents(p=1.5, q=1.2),
}
