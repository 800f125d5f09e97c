import logging
from typing import Callable, Optional, Union

import numpy as np

from hardy_bellman.errors import ConvergenceError, DomainError

ArrayLike = Union[float, np.ndarray]

logger = logging.getLogger("hardy_bellman.RootFinder")

_EPS = np.finfo(float).eps


class RootResult:
    def __init__(self, root: np.ndarray, residual: np.ndarray, iterations: int, converged: np.ndarray) -> None:
        """
        Outcome of a bracketed solve.

        Args:
            root (np.ndarray): Located roots, one per bracket.
            residual (np.ndarray): |func(root)| for each root.
            iterations (int): Iterations used by the slowest element.
            converged (np.ndarray): True where the residual met tol. False marks an element that
                stopped because its bracket collapsed to a few ulps first.
        """
        self.root = root
        self.residual = residual
        self.iterations = iterations
        self.converged = converged

    def scalar(self) -> "RootResult":
        """Collapse single-element arrays to Python scalars."""
        return RootResult(
            float(np.ravel(self.root)[0]),
            float(np.ravel(self.residual)[0]),
            self.iterations,
            bool(np.ravel(self.converged)[0]),
        )


def bracketed_root(
    func: Callable[[np.ndarray], np.ndarray],
    lo: ArrayLike,
    hi: ArrayLike,
    dfunc: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    tol: ArrayLike = 1e-12,
    max_iter: int = 200,
    newton_mask: Optional[np.ndarray] = None,
) -> RootResult:
    """
    Find a root of func inside every bracket [lo, hi] by bisection refined with safeguarded Newton.

    Works elementwise on arrays. Each bracket must carry a sign change of func. A Newton step is
    taken only when it stays strictly inside the current bracket and shrinks the step fast enough,
    otherwise the bracket is bisected. An element stops once |func(x)| <= tol or its bracket has
    collapsed to a few ulps.

    Args:
        func: Vectorised function whose zero is wanted.
        lo, hi: Bracket endpoints (broadcast together).
        dfunc: Vectorised derivative of func. None means pure bisection.
        tol: Absolute residual tolerance, scalar or per element.
        max_iter: Iteration budget.
        newton_mask: Elements allowed to take Newton steps (default all when dfunc is given).

    Returns:
        RootResult: roots, residuals, iteration count and the per-element converged flags.

    Raises:
        DomainError: if some bracket does not contain a sign change.
        ConvergenceError: if the budget is exhausted before every element converged.
    """
    lo, hi = np.broadcast_arrays(np.asarray(lo, dtype=float), np.asarray(hi, dtype=float))
    lo = np.array(lo, dtype=float, copy=True).ravel()
    hi = np.array(hi, dtype=float, copy=True).ravel()
    tol = np.broadcast_to(np.asarray(tol, dtype=float), lo.shape)

    f_lo = np.asarray(func(lo), dtype=float)
    f_hi = np.asarray(func(hi), dtype=float)

    root_at_lo = f_lo == 0.0
    root_at_hi = (f_hi == 0.0) & ~root_at_lo
    bad = (np.sign(f_lo) * np.sign(f_hi) > 0) | ~np.isfinite(f_lo) | ~np.isfinite(f_hi)
    if np.any(bad):
        index = int(np.flatnonzero(bad)[0])
        raise DomainError(
            f"no sign change on bracket [{lo[index]!r}, {hi[index]!r}]: "
            f"f(lo)={f_lo[index]!r}, f(hi)={f_hi[index]!r}",
            constraint="bracket",
            value=(lo[index], hi[index]),
        )

    if dfunc is None:
        allow_newton = np.zeros(lo.shape, dtype=bool)
    elif newton_mask is None:
        allow_newton = np.ones(lo.shape, dtype=bool)
    else:
        allow_newton = np.broadcast_to(np.asarray(newton_mask, dtype=bool), lo.shape).copy()

    x = 0.5 * (lo + hi)
    x = np.where(root_at_lo, lo, np.where(root_at_hi, hi, x))
    done = root_at_lo | root_at_hi
    dx_old = np.abs(hi - lo)
    fx = np.asarray(func(x), dtype=float)

    iterations = 0
    for iterations in range(1, max_iter + 1):
        floor = 4.0 * _EPS * np.maximum(np.maximum(np.abs(lo), np.abs(hi)), 1e-300)
        done |= (np.abs(fx) <= tol) | ((hi - lo) <= floor)
        active = ~done
        if not np.any(active):
            break

        same_as_lo = np.sign(fx) == np.sign(f_lo)
        move_lo = active & same_as_lo
        move_hi = active & ~same_as_lo
        lo = np.where(move_lo, x, lo)
        f_lo = np.where(move_lo, fx, f_lo)
        hi = np.where(move_hi, x, hi)

        step_bisect = 0.5 * (hi - lo)
        x_next = lo + step_bisect
        if np.any(allow_newton & active):
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                d = np.asarray(dfunc(x), dtype=float)
                newton_step = fx / d
                x_newton = x - newton_step
            use_newton = (
                allow_newton
                & active
                & np.isfinite(x_newton)
                & (x_newton > lo)
                & (x_newton < hi)
                & (np.abs(2.0 * fx) <= np.abs(dx_old * d))
            )
            x_next = np.where(use_newton, x_newton, x_next)
            dx_old = np.where(active, np.where(use_newton, np.abs(newton_step), step_bisect), dx_old)
        else:
            dx_old = np.where(active, step_bisect, dx_old)

        x = np.where(active, x_next, x)
        fx = np.asarray(func(x), dtype=float)
    else:
        floor = 4.0 * _EPS * np.maximum(np.maximum(np.abs(lo), np.abs(hi)), 1e-300)
        done |= (np.abs(fx) <= tol) | ((hi - lo) <= floor)

    if not np.all(done):
        worst = float(np.max(np.abs(fx[~done])))
        raise ConvergenceError(
            f"bracketed solve did not converge within {max_iter} iterations "
            f"({int(np.count_nonzero(~done))} elements left, worst residual {worst!r})",
            iterations=max_iter,
            residual=worst,
        )

    residual = np.abs(fx)
    converged = residual <= tol
    if not np.all(converged):
        logger.debug(
            "%d of %d elements stopped on a collapsed bracket above tol (worst residual %r)",
            int(np.count_nonzero(~converged)),
            lo.size,
            float(np.max(residual[~converged])),
        )
    logger.debug("bracketed solve of %d elements converged in %d iterations", lo.size, iterations)
    return RootResult(x, residual, iterations, converged)
