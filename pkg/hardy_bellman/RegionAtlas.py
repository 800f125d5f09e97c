"""
Threshold curves of D and the grid atlas built from them.

delta is the interior zero of theta(s1) = phi(omega_p(s1)) - g(s1). Above delta the curve s2'(s1)
separates omega_p(s1) < t0 from omega_p(s1) > t0, and s2''(s1) splits t'(0) > 0 from t'(0) < 0.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from functools import lru_cache
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from hardy_bellman.Domain import SPoint, validate_spoint
from hardy_bellman.errors import ConvergenceError, DomainError
from hardy_bellman.Exponents import Exponents
from hardy_bellman.RootFinder import bracketed_root
from hardy_bellman.SharpConstant import DEFAULT_TOL, Branch, Sign, sharp_t, solve_t0
from hardy_bellman.SpecialFunctions import ArrayLike, a_of_s2, omega_values
from hardy_bellman.utils import atomic_write_files, csv_lines, write_log

logger = logging.getLogger("hardy_bellman.RegionAtlas")

DELTA_SCAN = 256
CURVE_BAND = 1e-9
OVERFLOW_FLOOR = 1e-100
SOLVE_FLOOR = 1e-300

ATLAS_HEADER = ("s1", "s2", "t0", "t", "branch", "tprime0_sign", "classification")
CURVE_HEADER = ("s1", "delta_flag", "s2_prime", "s2_double_prime")


class TheoremTag(str, Enum):
    BELOW_DELTA = "BELOW_DELTA"
    ABOVE_S2PRIME = "ABOVE_S2PRIME"
    BETWEEN = "BETWEEN"
    ON_S2PRIME = "ON_S2PRIME"


class XTag(str, Enum):
    X_REGION = "X_REGION"
    NOT_X = "NOT_X"
    ON_S2DOUBLEPRIME = "ON_S2DOUBLEPRIME"


class Comparisons(BaseModel):
    """Each field is "<", "=" or ">" for the left quantity against the right one."""

    model_config = ConfigDict(frozen=True)

    s2_vs_s2_prime: Optional[str]
    s2_vs_s2_double_prime: str
    omega_p_vs_t0: str
    omega_p: float
    t0: float


class RegionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    delta: float
    theorem: TheoremTag
    x_region: XTag
    s2_prime: Optional[float]
    s2_double_prime: float
    comparisons: Comparisons

    @property
    def classification(self) -> str:
        return f"{self.theorem.value}:{self.x_region.value}"


class AtlasRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    s1: float
    s2: float
    t0: float
    t: float
    branch: Branch
    tprime0_sign: Sign
    classification: str

    def cells(self) -> list:
        return [self.s1, self.s2, self.t0, self.t, self.branch, self.tprime0_sign, self.classification]


class CurveRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    s1: float
    delta_flag: int
    s2_prime: Optional[float]
    s2_double_prime: float


def _lower_curve(E: Exponents, s1: ArrayLike) -> ArrayLike:
    return s1 ** E.slope


def _g_lower(E: Exponents, s1: np.ndarray) -> np.ndarray:
    return s1 - E.ratio * s1 ** ((E.p - E.q) / (E.p - 1.0))


def _phi_at_omega(E: Exponents, s1: np.ndarray) -> np.ndarray:
    w = np.asarray(omega_values(E.p, s1), dtype=float)
    return w ** E.p - E.ratio * w ** (E.p - E.q)


def _theta(E: Exponents, s1: np.ndarray) -> np.ndarray:
    return _phi_at_omega(E, s1) - _g_lower(E, s1)


def _theta_prime(E: Exponents, s1: np.ndarray) -> np.ndarray:
    p, q = E.p, E.q
    w = np.asarray(omega_values(p, s1), dtype=float)
    near_one = np.abs(w - 1.0) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        lam = np.where(near_one, q, (w - w ** (1.0 - q)) / (w - 1.0))
    return -lam / (p - 1.0) + p / (p - 1.0) * s1 ** (-E.slope) - 1.0


def _check_open_unit(name: str, value: ArrayLike, closed_right: bool = False) -> np.ndarray:
    arr = np.asarray(value, dtype=float)
    upper_ok = arr <= 1.0 if closed_right else arr < 1.0
    if np.any(~((arr > 0.0) & upper_ok)):
        bound = "1]" if closed_right else "1)"
        raise DomainError(f"{name} must lie in (0, {bound}, got {value!r}", constraint=f"0 < {name} < 1", value=value)
    return arr


def theta(E: Exponents, s1: ArrayLike) -> ArrayLike:
    """
    theta(s1) = phi(omega_p(s1)) - s1 + (p/(p-q)) s1^((p-q)/(p-1)).

    Strictly concave on (0, 1), negative near 0 and zero at s1 = 1.
    """
    arr = _check_open_unit("s1", s1, closed_right=True)
    out = _theta(E, arr)
    return float(out) if arr.ndim == 0 else out


def theta_prime(E: Exponents, s1: ArrayLike) -> ArrayLike:
    """theta'(s1) = -lambda(omega_p(s1))/(p-1) + (p/(p-1)) s1^(-(q-1)/(p-1)) - 1, lambda(x) = (x - x^(1-q))/(x-1)."""
    arr = _check_open_unit("s1", s1, closed_right=True)
    out = _theta_prime(E, arr)
    return float(out) if arr.ndim == 0 else out


def theta_at_zero(E: Exponents) -> float:
    """The limit of theta at 0+: (p/(p-1))^(p-q) [(p/(p-1))^q - p/(p-q)]."""
    c = E.p_conjugate
    return c ** (E.p - E.q) * (c ** E.q - E.ratio)


@lru_cache(maxsize=64)
def solve_delta(E: Exponents, tol: float = 1e-13) -> float:
    """
    The unique zero delta of theta in (0, 1).

    theta is concave with theta(0+) < 0 and theta(1) = 0, so it is negative on (0, delta) and
    positive on (delta, 1). A scan of DELTA_SCAN points, extended towards 1 by 1 - 10^-k, finds a
    positive sample; the left sign change is then refined with safeguarded Newton.

    Raises:
        ConvergenceError: if no positive sample of theta is found.
    """
    interior = np.linspace(0.0, 1.0, DELTA_SCAN + 1)[1:-1]
    tail = 1.0 - 10.0 ** -np.arange(3.0, 14.0)
    grid = np.concatenate(([1e-15], interior, tail[tail > interior[-1]]))
    values = _theta(E, grid)
    positive = np.flatnonzero(values > 0.0)
    if positive.size == 0:
        raise ConvergenceError(f"theta has no positive sample on (0, 1) for {E.key()}")
    k = int(positive[0])
    if k == 0:
        raise ConvergenceError(f"theta is positive at the left end of the scan for {E.key()}")
    result = bracketed_root(
        lambda s: _theta(E, s),
        grid[k - 1],
        grid[k],
        dfunc=lambda s: _theta_prime(E, s),
        tol=tol,
    ).scalar()
    logger.debug("delta(%s) = %r after %d iterations", E.key(), result.root, result.iterations)
    return result.root


def s2_prime_of(E: Exponents, s1: float) -> float:
    """
    s2'(s1) = (p/(p-q)) s1 / (s1 - phi(omega_p(s1))) on [delta, 1).

    It starts on the lower boundary of D at s1 = delta and tends to 1 as s1 -> 1-.

    Raises:
        DomainError: for s1 < delta, where the curve is not defined.
    """
    delta = solve_delta(E)
    if not (delta * (1.0 - 1e-12) <= s1 < 1.0):
        raise DomainError(
            f"s2' is defined for delta={delta!r} <= s1 < 1, got {s1!r}", constraint="delta <= s1 < 1", value=s1
        )
    return float(E.ratio * s1 / (s1 - _phi_at_omega(E, np.float64(s1))))


def _h_threshold(E: Exponents, s2: np.ndarray, floor: float) -> np.ndarray:
    a = np.asarray(a_of_s2(E, np.maximum(s2, floor)), dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        num = ((E.p - E.q) / E.q * a + 1.0 / s2) ** E.p
        den = (E.p / E.q * a + 1.0) ** (E.p - E.q)
        out = num / den
    return np.where((s2 < floor) | ~np.isfinite(out), np.inf, out)


def h_threshold(E: Exponents, s2: ArrayLike, floor: float = OVERFLOW_FLOOR) -> ArrayLike:
    """
    h(s2) = ((p-q)/q a(s2) + 1/s2)^p / ((p/q) a(s2) + 1)^(p-q).

    Strictly decreasing from +inf at 0+ to h(1) = 1.

    Args:
        E (Exponents): The exponent pair.
        s2 (ArrayLike): Points of (0, 1].
        floor (float): Below this s2 the value is reported as +inf.

    Returns:
        ArrayLike: h(s2), +inf below floor or on overflow.
    """
    arr = _check_open_unit("s2", s2, closed_right=True)
    out = _h_threshold(E, arr, floor)
    return float(out) if arr.ndim == 0 else out


def _log_h_threshold(E: Exponents, s2: np.ndarray) -> np.ndarray:
    a = np.asarray(a_of_s2(E, s2), dtype=float)
    return E.p * np.log((E.p - E.q) / E.q * a + 1.0 / s2) - (E.p - E.q) * np.log(E.p / E.q * a + 1.0)


def s2_double_prime_values(E: Exponents, s1: ArrayLike, tol: float = 1e-12) -> ArrayLike:
    """
    Vectorised s2''(s1): the unique s2'' in (0, 1) with h(s2'') = s1^(-q).

    Solved as log h(s2) = -q log s1 in log s2, which never overflows. The lower end of each
    bracket is squared down from 1/2 until log h exceeds the target, then bisected to an absolute
    residual of tol on log h (a relative residual of tol on h). Where s2'' lies below SOLVE_FLOOR
    it is reported as 0.0.

    Args:
        E (Exponents): The exponent pair.
        s1 (ArrayLike): Points of (0, 1).
        tol (float): Relative residual tolerance on h.

    Returns:
        ArrayLike: s2''(s1), 0.0 where it falls below SOLVE_FLOOR.
    """
    arr = _check_open_unit("s1", s1)
    flat = arr.ravel()
    target = -E.q * np.log(flat)
    lo = np.full_like(flat, 0.5)
    below = np.zeros(flat.shape, dtype=bool)
    while True:
        short = ~below & ~(_log_h_threshold(E, lo) > target)
        if not np.any(short):
            break
        lo = np.where(short, np.maximum(lo * lo, SOLVE_FLOOR), lo)
        below |= short & (lo == SOLVE_FLOOR) & ~(_log_h_threshold(E, lo) > target)

    out = np.zeros_like(flat)
    solve = ~below
    if np.any(solve):
        wanted = target[solve]
        result = bracketed_root(
            lambda u: _log_h_threshold(E, np.exp(u)) - wanted,
            np.log(lo[solve]),
            np.zeros(wanted.shape),
            tol=tol,
        )
        out[solve] = np.exp(result.root)
    if np.any(below):
        logger.debug("s2'' below %r for %d of %d s1 values", SOLVE_FLOOR, int(np.count_nonzero(below)), flat.size)
    out = out.reshape(arr.shape)
    return float(out) if arr.ndim == 0 else out


@lru_cache(maxsize=4096)
def s2_double_prime(E: Exponents, s1: float, tol: float = 1e-12) -> float:
    """s2''(s1) at a single point, memoised per (p, q, s1, tol)."""
    return float(s2_double_prime_values(E, float(s1), tol))


def _compare(left: float, right: float, band: float) -> str:
    if abs(left - right) <= band * max(abs(left), abs(right), 1e-300):
        return "="
    return "<" if left < right else ">"


def classify(E: Exponents, P: SPoint, tol: float = CURVE_BAND, solve_tol: float = DEFAULT_TOL) -> RegionReport:
    """
    Locate P relative to delta, s2'(s1) and s2''(s1).

    Comparisons are relative: a point whose s2 is within tol of s2' (or s2'') relative to the
    larger of the two is tagged ON_S2PRIME (or ON_S2DOUBLEPRIME). X membership requires s2 below
    s2'' by more than that band.

    solve_tol is the residual tolerance handed to the t0 and s2'' solves.

    Raises:
        ConvergenceError: if s2'' is below SOLVE_FLOOR and so is s2, which leaves the side undecided.
    """
    delta = solve_delta(E)
    t0 = solve_t0(E, P, solve_tol)
    w = float(omega_values(E.p, P.s1))
    s2pp = s2_double_prime(E, P.s1, solve_tol)
    if s2pp == 0.0 and P.s2 <= SOLVE_FLOOR:
        raise ConvergenceError(f"s2={P.s2!r} and s2'' both lie below {SOLVE_FLOOR!r}")

    s2p: Optional[float] = None
    if P.s1 < delta:
        theorem = TheoremTag.BELOW_DELTA
    else:
        s2p = s2_prime_of(E, P.s1)
        relation = _compare(P.s2, s2p, tol)
        theorem = {"=": TheoremTag.ON_S2PRIME, ">": TheoremTag.ABOVE_S2PRIME, "<": TheoremTag.BETWEEN}[relation]

    side = _compare(P.s2, s2pp, tol)
    x_region = {"=": XTag.ON_S2DOUBLEPRIME, ">": XTag.NOT_X, "<": XTag.X_REGION}[side]
    comparisons = Comparisons(
        s2_vs_s2_prime=None if s2p is None else _compare(P.s2, s2p, tol),
        s2_vs_s2_double_prime=side,
        omega_p_vs_t0=_compare(w, t0, tol),
        omega_p=w,
        t0=t0,
    )
    return RegionReport(
        delta=delta,
        theorem=theorem,
        x_region=x_region,
        s2_prime=s2p,
        s2_double_prime=s2pp,
        comparisons=comparisons,
    )


def _on_lower_curve(E: Exponents, s1: float) -> SPoint:
    s2 = float(_lower_curve(E, s1))
    for _ in range(8):
        try:
            return validate_spoint(E, s1, s2)
        except DomainError:
            s2 = float(np.nextafter(s2, 1.0))
    return validate_spoint(E, s1, s2)


class Atlas:
    def __init__(self, E: Exponents, resolution: int, rows: List[AtlasRow], curves: List[CurveRow], boundary: List[AtlasRow]) -> None:
        """
        Grid rows, threshold curves and lower-boundary rows of one atlas run.

        Args:
            E (Exponents): The exponent pair.
            resolution (int): Grid points per axis.
            rows (List[AtlasRow]): Interior grid points of D, row-major in s1 then s2.
            curves (List[CurveRow]): delta first, then s2' and s2'' per grid s1.
            boundary (List[AtlasRow]): Points of the curve s2 = s1^((q-1)/(p-1)).
        """
        self.E = E
        self.resolution = resolution
        self.rows = rows
        self.curves = curves
        self.boundary = boundary

    def counts(self) -> Dict[str, int]:
        counts: Dict[str, int] = {}
        for row in self.rows:
            counts[row.classification] = counts.get(row.classification, 0) + 1
        return dict(sorted(counts.items()))

    def atlas_csv(self) -> str:
        return csv_lines(ATLAS_HEADER, (row.cells() for row in self.rows))

    def curves_csv(self) -> str:
        return csv_lines(
            CURVE_HEADER,
            ([row.s1, row.delta_flag, row.s2_prime, row.s2_double_prime] for row in self.curves),
        )

    def boundary_csv(self) -> str:
        return csv_lines(ATLAS_HEADER, (row.cells() for row in self.boundary))

    def write(self, out_dir: str) -> Dict[str, str]:
        """Write atlas.csv, curves.csv and boundary.csv into out_dir as one set and return their paths."""
        paths = {
            "atlas": os.path.join(out_dir, "atlas.csv"),
            "curves": os.path.join(out_dir, "curves.csv"),
            "boundary": os.path.join(out_dir, "boundary.csv"),
        }
        atomic_write_files(
            {
                paths["atlas"]: self.atlas_csv(),
                paths["curves"]: self.curves_csv(),
                paths["boundary"]: self.boundary_csv(),
            }
        )
        return paths


def _row(E: Exponents, P: SPoint, tol: float, solve_tol: float) -> AtlasRow:
    result = sharp_t(E, P, tol=solve_tol)
    report = classify(E, P, tol, solve_tol)
    return AtlasRow(
        s1=P.s1,
        s2=P.s2,
        t0=result.t0,
        t=result.t,
        branch=result.branch,
        tprime0_sign=result.tprime0_sign,
        classification=report.classification,
    )


def emit_atlas(
    E: Exponents,
    resolution: int,
    tol: float = CURVE_BAND,
    workers: Optional[int] = None,
    log: bool = True,
    solve_tol: float = DEFAULT_TOL,
) -> Atlas:
    """
    Evaluate sharp_t and classify on the cell-centred grid s = (k + 1/2)/resolution in both axes.

    Only points strictly inside D are kept. Rows come out row-major in s1 then s2 whatever the
    number of workers.

    Args:
        E (Exponents): The exponent pair.
        resolution (int): Grid points per axis, at least 2.
        tol (float): Curve proximity band of classify.
        workers (int, optional): Thread pool size; None evaluates serially.
        log (bool): Emit progress through the module logger.
        solve_tol (float): Residual tolerance of the root solves behind each row and curve.

    Returns:
        Atlas: rows, curve table and boundary rows.
    """
    if not (isinstance(resolution, int) and resolution >= 2):
        raise DomainError(f"resolution must be an integer >= 2, got {resolution!r}", constraint="resolution >= 2", value=resolution)
    nodes = (np.arange(resolution) + 0.5) / resolution
    points: List[SPoint] = []
    for s1 in nodes:
        for s2 in nodes:
            if s1 ** (E.q - 1.0) < s2 ** (E.p - 1.0):
                points.append(validate_spoint(E, s1, s2))
    boundary_points = [_on_lower_curve(E, float(s1)) for s1 in nodes]

    write_log(log, logger, f"atlas {E.key()}: {len(points)} interior points at resolution {resolution}", "INFO")
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda P: _row(E, P, tol, solve_tol), points))
            boundary = list(pool.map(lambda P: _row(E, P, tol, solve_tol), boundary_points))
    else:
        rows = [_row(E, P, tol, solve_tol) for P in points]
        boundary = [_row(E, P, tol, solve_tol) for P in boundary_points]

    delta = solve_delta(E)
    curves = [
        CurveRow(
            s1=delta,
            delta_flag=1,
            s2_prime=float(_lower_curve(E, delta)),
            s2_double_prime=s2_double_prime(E, delta, solve_tol),
        )
    ]
    for s1 in nodes:
        s1 = float(s1)
        curves.append(
            CurveRow(
                s1=s1,
                delta_flag=0,
                s2_prime=s2_prime_of(E, s1) if s1 >= delta else None,
                s2_double_prime=s2_double_prime(E, s1, solve_tol),
            )
        )
    write_log(log, logger, f"atlas {E.key()} done: {len(rows)} rows", "DEBUG")
    return Atlas(E, resolution, rows, curves, boundary)
