"""
Non-increasing step functions on (0, kappa] and the Hardy functional of their running average.
"""
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from hardy_bellman.errors import DomainError

GAUSS_ORDER = 8
GEOMETRIC_SPAN = 40.0

_NODES, _WEIGHTS = leggauss(GAUSS_ORDER)


def uniform_edges(n: int, kappa: float = 1.0) -> np.ndarray:
    """Edges 0 = t_0 < ... < t_n = kappa of n equal cells."""
    _check_grid(n, kappa)
    return np.linspace(0.0, kappa, n + 1)


def geometric_edges(n: int, kappa: float = 1.0, span: float = GEOMETRIC_SPAN) -> np.ndarray:
    """
    Edges with t_0 = 0 and t_k = kappa * 10^(-span (n-k)/(n-1)) for k >= 1.

    The first cell is (0, kappa 10^-span]; the remaining n-1 cells grow geometrically up to kappa.
    """
    _check_grid(n, kappa)
    if n == 1:
        return np.array([0.0, kappa])
    k = np.arange(1, n + 1)
    return np.concatenate(([0.0], kappa * 10.0 ** (-span * (n - k) / (n - 1.0))))


def _check_grid(n: int, kappa: float) -> None:
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise DomainError(f"number of cells must be a positive integer, got {n!r}", constraint="n >= 1", value=n)
    if not 0.0 < kappa <= 1.0:
        raise DomainError(f"kappa must lie in (0, 1], got {kappa!r}", constraint="0 < kappa <= 1", value=kappa)


class StepFn:
    def __init__(self, edges: np.ndarray, values: np.ndarray) -> None:
        """
        A non-negative, non-increasing step function on (0, kappa].

        Args:
            edges (np.ndarray): Cell edges 0 = t_0 < t_1 < ... < t_n = kappa.
            values (np.ndarray): Cell values v_1 >= v_2 >= ... >= v_n >= 0.

        Raises:
            DomainError: if the edges or values break these conditions.
        """
        edges = np.asarray(edges, dtype=float)
        values = np.asarray(values, dtype=float)
        if edges.ndim != 1 or edges.size != values.size + 1 or edges[0] != 0.0 or np.any(np.diff(edges) <= 0.0):
            raise DomainError("edges must increase strictly from 0 with one more entry than values", constraint="edges")
        if not 0.0 < edges[-1] <= 1.0:
            raise DomainError(f"kappa must lie in (0, 1], got {edges[-1]!r}", constraint="0 < kappa <= 1", value=edges[-1])
        if np.any(~np.isfinite(values)) or np.any(values < 0.0):
            raise DomainError("values must be finite and non-negative", constraint="v >= 0")
        if np.any(np.diff(values) > 0.0):
            raise DomainError("values must be non-increasing", constraint="v_1 >= ... >= v_n")
        self.edges = edges
        self.values = values

    @classmethod
    def uniform(cls, values: np.ndarray, kappa: float = 1.0) -> "StepFn":
        values = np.asarray(values, dtype=float)
        return cls(uniform_edges(values.size, kappa), values)

    @classmethod
    def geometric(cls, values: np.ndarray, kappa: float = 1.0, span: float = GEOMETRIC_SPAN) -> "StepFn":
        values = np.asarray(values, dtype=float)
        return cls(geometric_edges(values.size, kappa, span), values)

    @property
    def kappa(self) -> float:
        return float(self.edges[-1])

    @property
    def n(self) -> int:
        return int(self.values.size)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def moment(self, r: float) -> float:
        """The integral of v^r over (0, kappa]."""
        return float(np.sum(self.values ** r * self.widths))

    def moments(self, q: Optional[float], p: float) -> Tuple[float, Optional[float], float]:
        """(m_1, m_q, m_p); m_q is None when q is None."""
        return self.moment(1.0), None if q is None else self.moment(q), self.moment(p)


def rearrange(edges: np.ndarray, values: np.ndarray) -> StepFn:
    """The non-increasing rearrangement: cells sorted by decreasing value, widths carried along."""
    edges = np.asarray(edges, dtype=float)
    values = np.asarray(values, dtype=float)
    order = np.argsort(-values, kind="stable")
    widths = np.diff(edges)[order]
    sorted_edges = np.concatenate(([0.0], np.cumsum(widths)))
    # summing reordered widths can drift past kappa by an ulp
    sorted_edges[-1] = edges[-1]
    return StepFn(sorted_edges, values[order])


def _cell_quadrature(edges: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    a = edges[1:-1, None]
    b = edges[2:, None]
    half = 0.5 * (b - a)
    return a + half * (_NODES[None, :] + 1.0), half * _WEIGHTS[None, :]


def hardy_integral_and_gradient(edges: np.ndarray, values: np.ndarray, p: float) -> Tuple[float, np.ndarray]:
    """
    The integral over (0, kappa] of ((1/t) * integral_0^t h)^p and its gradient in the cell values.

    No ordering of the values is assumed. The running average is constant on the first cell and
    is integrated exactly there; every later cell uses GAUSS_ORDER-point Gauss-Legendre.

    Args:
        edges (np.ndarray): Cell edges starting at 0.
        values (np.ndarray): Cell values.
        p (float): Exponent > 1.

    Returns:
        Tuple[float, np.ndarray]: the functional and d(functional)/d(values).
    """
    edges = np.asarray(edges, dtype=float)
    values = np.asarray(values, dtype=float)
    widths = np.diff(edges)
    prefix = np.concatenate(([0.0], np.cumsum(values * widths)))

    first = values[0] ** p * widths[0]
    grad = np.empty_like(values)
    grad[0] = p * values[0] ** (p - 1.0) * widths[0]
    if values.size == 1:
        return float(first), grad

    t, w = _cell_quadrature(edges)
    offset = t - edges[1:-1, None]
    avg = (prefix[1:-1, None] + values[1:, None] * offset) / t
    total = first + float(np.sum(w * avg ** p))

    d_avg = p * avg ** (p - 1.0) / t
    own = np.sum(w * d_avg * offset, axis=1)
    later = np.sum(w * d_avg, axis=1)
    # cell j > i sees v_i through the prefix sum with weight width_i
    tail = np.concatenate((np.cumsum(later[::-1])[::-1], [0.0]))
    grad[0] += widths[0] * tail[0]
    grad[1:] = own + widths[1:] * tail[1:]
    return total, grad


def hardy_integral(edges: np.ndarray, values: np.ndarray, p: float) -> float:
    """The Hardy functional of an arbitrary step function given by edges and values."""
    return hardy_integral_and_gradient(edges, values, p)[0]


def hardy_functional(S: StepFn, p: float) -> float:
    """
    The integral over (0, kappa] of ((1/t) * integral_0^t S)^p.

    Args:
        S (StepFn): A non-increasing step function.
        p (float): Exponent > 1.

    Returns:
        float: The functional value.
    """
    if not p > 1.0:
        raise DomainError(f"p must exceed 1, got {p!r}", constraint="p > 1", value=p)
    return hardy_integral(S.edges, S.values, p)
