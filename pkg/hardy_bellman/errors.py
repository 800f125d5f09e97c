from typing import Any, Optional


class HardyBellmanError(Exception):
    """Base class for every error raised by hardy_bellman."""


class DomainError(HardyBellmanError, ValueError):
    def __init__(self, message: str, constraint: Optional[str] = None, value: Any = None) -> None:
        """
        Raised when an input lies outside the domain of an operation.

        Args:
            message (str): Human readable explanation.
            constraint (str, optional): The violated inequality, e.g. "s1^(q-1) <= s2^(p-1)".
            value (Any, optional): The offending value.
        """
        super().__init__(message)
        self.constraint = constraint
        self.value = value


class PreconditionError(DomainError):
    """A hypothesis of an operation does not hold for the given input."""


class DegenerateMomentsError(DomainError):
    """The moments describe a constant function (A sits at its lower bound f^q kappa^(1-q))."""


class ConvergenceError(HardyBellmanError, RuntimeError):
    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")) -> None:
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SingularityError(HardyBellmanError, ArithmeticError):
    """The tau denominator vanishes inside [1, t0]."""


class InconsistencyError(HardyBellmanError, RuntimeError):
    """No point of [1, t0] satisfies F <= 0; signals a numerical fault."""


class InfeasibleError(HardyBellmanError, RuntimeError):
    """No oracle candidate met the moment constraints within tolerance."""
