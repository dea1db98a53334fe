"""Gauss-Legendre quadrature rules on arbitrary intervals."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DEFAULT_ORDER = 30

_NEWTON_TOL = 1e-15
_NEWTON_MAXITER = 100


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and weights of an ``order``-point rule on ``interval``."""

    order: int
    nodes: np.ndarray
    weights: np.ndarray
    interval: tuple[float, float]

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def integrate(self, values: np.ndarray) -> float:
        """Weighted sum of function values sampled on the nodes."""
        return float(np.dot(self.weights, values))


def _legendre_with_derivative(n: int, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # three-term recurrence; returns P_n(x) and P_n'(x)
    p_prev = np.ones_like(x)
    p = x.copy()
    for k in range(2, n + 1):
        p_prev, p = p, ((2 * k - 1) * x * p - (k - 1) * p_prev) / k
    dp = n * (x * p - p_prev) / (x * x - 1.0)
    return p, dp


def _reference_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    if order == 1:
        return np.zeros(1), np.full(1, 2.0)
    half = (order + 1) // 2
    i = np.arange(1, half + 1)
    # Chebyshev-angle guesses for the positive roots, largest first
    x = np.cos(np.pi * (i - 0.25) / (order + 0.5))
    for _ in range(_NEWTON_MAXITER):
        p, dp = _legendre_with_derivative(order, x)
        step = p / dp
        x = x - step
        if np.max(np.abs(step)) <= _NEWTON_TOL:
            break
    else:
        raise RuntimeError(f"Legendre root refinement did not converge for order {order}")
    _, dp = _legendre_with_derivative(order, x)
    w = 2.0 / ((1.0 - x * x) * dp * dp)
    if order % 2:
        x[-1] = 0.0
    nodes = np.concatenate([-x, x[: order // 2][::-1]])
    weights = np.concatenate([w, w[: order // 2][::-1]])
    return nodes, weights


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """Gauss-Legendre rule with ``order`` points mapped affinely to ``[a, b]``.

    Roots of the Legendre polynomial are found by Newton iteration from
    Chebyshev-angle initial guesses, so the nodes come out sorted ascending
    and exactly mirror-symmetric about the midpoint.
    """
    if int(order) != order or order < 1:
        raise ValueError(f"quadrature order must be a positive integer, got {order}")
    if not a < b:
        raise ValueError(f"empty integration interval [{a}, {b}]")
    x, w = _reference_rule(int(order))
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return QuadratureRule(int(order), mid + half * x, half * w, (float(a), float(b)))


def integrate(rule: QuadratureRule, f: Callable[[np.ndarray], np.ndarray]) -> float:
    """Apply ``rule`` to the vectorised callable ``f``.

    Raises
    ------
    FloatingPointError
        If ``f`` is not finite on every node.
    """
    values = np.broadcast_to(np.asarray(f(rule.nodes), dtype=float), rule.nodes.shape)
    if not np.all(np.isfinite(values)):
        raise FloatingPointError("integrand is not finite on all quadrature nodes")
    return rule.integrate(values)
