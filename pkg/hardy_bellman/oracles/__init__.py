from hardy_bellman.oracles.ThreeConstraint import ThreeConstraintOracle, maximize_three_constraints
from hardy_bellman.oracles.TwoConstraint import TwoConstraintOracle, maximize_two_constraints

__all__ = [
    "TwoConstraintOracle",
    "ThreeConstraintOracle",
    "maximize_two_constraints",
    "maximize_three_constraints",
]
