__version__ = "0.1.0"

from hardy_bellman.Exponents import PRESETS, Exponents
from hardy_bellman.Domain import MomentData, SPoint, moments_to_spoint, solve_kappa, validate_spoint
from hardy_bellman.SharpConstant import SharpResult, sharp_t, solve_t0
from hardy_bellman.RegionAtlas import classify, emit_atlas, solve_delta
from hardy_bellman.StepFunction import StepFn, hardy_functional
from hardy_bellman.Oracle import Oracle, OracleReport
from hardy_bellman.LemmaSuite import LemmaSuite, default_suite

__all__ = [
    "Exponents",
    "PRESETS",
    "SPoint",
    "MomentData",
    "validate_spoint",
    "moments_to_spoint",
    "solve_kappa",
    "SharpResult",
    "sharp_t",
    "solve_t0",
    "classify",
    "emit_atlas",
    "solve_delta",
    "StepFn",
    "hardy_functional",
    "Oracle",
    "OracleReport",
    "LemmaSuite",
    "default_suite",
]
