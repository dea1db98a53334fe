"""Expansion of the density equation in eps = 1/|Delta| around the Ising limit.

With cosh(lam) = 1/eps the kernels become

    dp/da      = sqrt(1 - eps^2) / (1 - eps cos a)
    dtheta/db  = sqrt(1 - eps^2) / (1 - eps^2 (1 + cos(a - c)) / 2)

whose Taylor coefficients are polynomials in cos a and cos(a - c).  The
order-k density R_k follows from the lower orders by a closed inversion of
(1 + projection onto constants), so the whole series is a sequence of
matrix-vector products on a fixed quadrature grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import optimize
from scipy.special import binom

from .model import DomainError
from .quadrature import QuadratureRule, gauss_legendre

DEFAULT_SERIES_ORDER = 14
MAX_SERIES_ORDER = 20
Y_INDEPENDENCE_TOL = 1e-10
CANCELLATION_TOL = 1e-10
# coefficients below this count as vanishing when locating the leading term
LEADING_TERM_FLOOR = 1e-12


class SeriesError(ArithmeticError):
    """The recursion produced an inconsistent coefficient."""


def series_quadrature_order(max_order: int) -> int:
    """Gauss-Legendre points used for a series truncated at ``max_order``.

    Integrands reach trigonometric degree max_order + 1 on intervals up to
    [-pi, pi]; 3 points per unit of frequency plus a margin keeps the rule
    at round-off level (checked in the tests against a doubled rule).
    """
    return max(30, 3 * (max_order + 1) + 16)


@lru_cache(maxsize=None)
def sqrt_one_minus_coeffs(n: int) -> tuple[float, ...]:
    """Taylor coefficients c_m of sqrt(1 - x) = sum_m c_m x^m, m = 0..n."""
    return tuple(float((-1) ** m * binom(0.5, m)) for m in range(n + 1))


@dataclass(frozen=True)
class GridFunction:
    rule: QuadratureRule
    values: np.ndarray

    def integral(self) -> float:
        return self.rule.integrate(self.values)


def dp_coefficient(k: int, alpha) -> np.ndarray:
    """eps^k coefficient of dp/da: sum over 2m + n = k of c_m cos^n(a)."""
    c = np.cos(np.asarray(alpha, dtype=float))
    cm = sqrt_one_minus_coeffs(k // 2)
    return sum(cm[m] * c ** (k - 2 * m) for m in range(k // 2 + 1))


def theta_coefficient(k: int, alpha, beta) -> np.ndarray:
    """eps^k coefficient of dtheta/db; zero for odd k."""
    u = 0.5 * (1.0 + np.cos(np.subtract(alpha, beta)))
    if k % 2:
        return np.zeros_like(u)
    j = k // 2
    cm = sqrt_one_minus_coeffs(j)
    return sum(cm[m] * u ** (j - m) for m in range(j + 1))


def energy_kernel_coefficient(n: int, alpha) -> np.ndarray:
    """eps^n coefficient of (1 - eps^2) / (1 - eps cos a) = eps sinh(lam) dp/da."""
    c = np.cos(np.asarray(alpha, dtype=float))
    out = c**n
    if n >= 2:
        out = out - c ** (n - 2)
    return out


def kernel_series(
    k: int, b: float, rule: QuadratureRule
) -> tuple[GridFunction, Callable[[np.ndarray, np.ndarray], np.ndarray]]:
    """Order-k kernel coefficients: dp_k on the grid and theta_k as a callable."""
    if k < 0:
        raise DomainError(f"order must be non-negative, got {k}")
    dp_k = GridFunction(rule, dp_coefficient(k, rule.nodes))
    return dp_k, lambda a, c: theta_coefficient(k, a, c)


@dataclass
class EpsilonSeries:
    """Truncated eps-series of R, y, f and E_GS at fixed integration limit b.

    ``f_coeffs[0]`` is the coefficient of 1/eps, ``f_coeffs[k + 1]`` that of eps^k.
    """

    b: float
    max_order: int
    rule: QuadratureRule
    R_coeffs: list[GridFunction] = field(default_factory=list)
    q_coeffs: list[GridFunction] = field(default_factory=list)
    y_coeffs: list[float] = field(default_factory=list)
    f_coeffs: list[float] = field(default_factory=list)
    e_coeffs: list[float] = field(default_factory=list)
    e_inverse_eps: float = 0.0
    _theta_mats: dict = field(default_factory=dict, repr=False)

    def theta_matrix(self, k: int) -> np.ndarray:
        # w_c theta_k(a, c) / (2 pi) on the grid
        if k not in self._theta_mats:
            x, w = self.rule.nodes, self.rule.weights
            th = theta_coefficient(k, x[:, None], x[None, :])
            self._theta_mats[k] = th * w[None, :] / (2.0 * math.pi)
        return self._theta_mats[k]

    @property
    def f_minus_one(self) -> float:
        return self.f_coeffs[0]

    def y_at(self, eps: float, order: int | None = None) -> float:
        return _horner(self.y_coeffs, eps, order)

    def e_at(self, eps: float, order: int | None = None) -> float:
        return _horner(self.e_coeffs, eps, order)

    def f_at(self, eps: float, order: int | None = None) -> float:
        """f(eps) including the f_{-1}/eps term."""
        return self.f_coeffs[0] / eps + _horner(self.f_coeffs[1:], eps, order)

    def R_at(self, eps: float, order: int | None = None) -> np.ndarray:
        n = len(self.R_coeffs) if order is None else order + 1
        return sum(self.R_coeffs[k].values * eps**k for k in range(n))

    def untrusted(self, eps: float) -> bool:
        """Divergence heuristic: the last retained term outweighs the first."""
        return any(last_term_dominates(c, eps) for c in (self.y_coeffs, self.e_coeffs))


def last_term_dominates(coeffs, eps: float) -> bool:
    """True when |c_K eps^K| exceeds the leading non-vanishing term |c_j eps^j|."""
    coeffs = np.asarray(coeffs, dtype=float)
    k = len(coeffs) - 1
    lead = np.nonzero(np.abs(coeffs) > LEADING_TERM_FLOOR)[0]
    if len(lead) == 0 or lead[0] == k:
        return False
    j = lead[0]
    return abs(coeffs[k]) * eps**k > abs(coeffs[j]) * eps**j


def _horner(coeffs, eps: float, order: int | None = None) -> float:
    n = len(coeffs) if order is None else order + 1
    acc = 0.0
    for c in reversed(coeffs[:n]):
        acc = acc * eps + c
    return acc


def _zero_width_rule() -> QuadratureRule:
    return QuadratureRule(1, np.zeros(1), np.zeros(1), (0.0, 0.0))


def _new_series(b: float, max_order: int, quad_order: int | None) -> EpsilonSeries:
    if not 0.0 <= b <= math.pi:
        raise DomainError(f"b must lie in [0, pi], got {b}")
    if not 0 <= max_order <= MAX_SERIES_ORDER:
        raise DomainError(f"series order must lie in [0, {MAX_SERIES_ORDER}], got {max_order}")
    if b == 0.0:
        rule = _zero_width_rule()
    else:
        rule = gauss_legendre(quad_order or series_quadrature_order(max_order), -b, b)
    series = EpsilonSeries(b=float(b), max_order=max_order, rule=rule)
    r0 = np.full(rule.order, 1.0 / (1.0 + b / math.pi))
    series.R_coeffs.append(GridFunction(rule, r0))
    series.q_coeffs.append(GridFunction(rule, np.ones(rule.order)))
    series.y_coeffs.append((1.0 - b / math.pi) / (1.0 + b / math.pi))
    return series


def invert_order_k(q: np.ndarray, rule: QuadratureRule, b: float) -> np.ndarray:
    """Solve R + (1/2 pi) int R = q, whose constant part is fixed by integrating once."""
    return q - rule.integrate(q) / (2.0 * (b + math.pi))


def recursion_step(series: EpsilonSeries, k: int) -> GridFunction:
    """Compute R_k from R_0..R_{k-1} and append R_k, q_k and y_k to ``series``."""
    if k != len(series.R_coeffs):
        raise DomainError(f"recursion needs orders 0..{k - 1}; have {len(series.R_coeffs)}")
    if k < 1:
        raise DomainError("order 0 is the closed-form start of the recursion")
    rule, b = series.rule, series.b
    q = dp_coefficient(k, rule.nodes)
    for j in range(k):
        if (k - j) % 2 == 0:
            q = q - series.theta_matrix(k - j) @ series.R_coeffs[j].values
    r = invert_order_k(q, rule, b)
    y_vec = 2.0 * (r - q)
    if np.ptp(y_vec) > Y_INDEPENDENCE_TOL:
        raise SeriesError(f"y_{k} depends on alpha (spread {np.ptp(y_vec):.3e})")
    # the same coefficient from pi (1 - y) = int R
    y_int = -rule.integrate(r) / math.pi
    if abs(y_int - np.mean(y_vec)) > Y_INDEPENDENCE_TOL:
        raise SeriesError(f"y_{k} from 2(R - q) and from int R differ by {abs(y_int - np.mean(y_vec)):.3e}")
    series.q_coeffs.append(GridFunction(rule, q))
    series.R_coeffs.append(GridFunction(rule, r))
    series.y_coeffs.append(float(np.mean(y_vec)))
    return series.R_coeffs[-1]


def _energy_density_coeffs(series: EpsilonSeries, top: int) -> list[float]:
    # eps * f = 1/4 - 1/(2 pi) int R (1 - eps^2)/(1 - eps cos a)
    rule = series.rule
    g = [energy_kernel_coefficient(n, rule.nodes) for n in range(top + 1)]
    out = []
    for m in range(top + 1):
        acc = sum(rule.integrate(series.R_coeffs[j].values * g[m - j]) for j in range(m + 1))
        out.append((0.25 if m == 0 else 0.0) - acc / (2.0 * math.pi))
    return out


def energy_series(
    b: float, max_order: int = DEFAULT_SERIES_ORDER, quad_order: int | None = None
) -> EpsilonSeries:
    """Series of y, f and E_GS = 2f - H y - Delta/2 through order ``max_order``.

    E_GS at order n needs R up to order n + 1, which is computed internally;
    the stored ``R_coeffs`` and ``y_coeffs`` stop at ``max_order``.
    """
    series = _new_series(b, max_order, quad_order)
    top = max_order + 1
    for k in range(1, top + 1):
        recursion_step(series, k)
    f = _energy_density_coeffs(series, top)
    y = series.y_coeffs
    # H = sqrt(1 - eps^2)/eps, -Delta/2 = 1/(2 eps)
    c = sqrt_one_minus_coeffs(top // 2 + 1)

    def coeff(n):
        acc = 2.0 * f[n + 1] + (0.5 if n == -1 else 0.0)
        for m, cm in enumerate(c):
            j = n + 1 - 2 * m
            if 0 <= j < len(y):
                acc -= cm * y[j]
        return acc

    series.e_inverse_eps = coeff(-1)
    if abs(series.e_inverse_eps) > CANCELLATION_TOL:
        raise SeriesError(f"1/eps terms of E_GS do not cancel: {series.e_inverse_eps:.3e}")
    series.e_coeffs = [coeff(n) for n in range(max_order + 1)]
    series.f_coeffs = f[: max_order + 2]
    series.R_coeffs.pop()
    series.q_coeffs.pop()
    series.y_coeffs.pop()
    return series


# closed forms used as anchors and for the analytic fixed-y derivative


def y0_closed(b):
    return (1.0 - b / math.pi) / (1.0 + b / math.pi)


def dy0_db(b):
    return -2.0 * math.pi / (math.pi + b) ** 2


def e0_closed(b):
    return -2.0 * math.sin(b) / (b + math.pi)


def de0_db(b):
    return -2.0 * ((b + math.pi) * math.cos(b) - math.sin(b)) / (b + math.pi) ** 2


def y1_closed(b):
    return -2.0 * math.sin(b) / (math.pi + b)


def e1_closed(b):
    sig = math.sin(b) / (b + math.pi)
    return 0.5 - b / math.pi - sig / math.pi * ((b + 2 * math.pi) * math.cos(b) - 2 * math.sin(b))


def fixed_y_slope_closed(b):
    """Closed form of dE_GS/d eps at eps = 0 and fixed y."""
    return 0.5 - b / math.pi + b * math.sin(b) * math.cos(b) / (math.pi * (math.pi + b))


def dE_deps_fixed_y(b: float, quad_order: int | None = None) -> float:
    """dE_GS/d eps at eps = 0 holding y fixed, from the recursed first-order series.

    Implicit differentiation: E_1 - (dE_0/db) y_1 / (dy_0/db).
    """
    if not 0.0 <= b <= math.pi:
        raise DomainError(f"b must lie in [0, pi], got {b}")
    s = energy_series(b, 1, quad_order)
    return s.e_coeffs[1] - de0_db(b) * s.y_coeffs[1] / dy0_db(b)


def fixed_y_sign_change(quad_order: int | None = None) -> float:
    """Root in (0, pi) of :func:`dE_deps_fixed_y`."""
    return optimize.brentq(
        lambda b: dE_deps_fixed_y(b, quad_order), 0.5, 3.0, xtol=1e-14, rtol=4 * np.finfo(float).eps
    )


def ow_optimum() -> tuple[float, float, float]:
    """Minimise the eps = 0 energy -2 sin b/(b + pi) over b.

    Returns ``(concurrence, b, y)``.  The stationarity condition
    (b + pi) cos b = sin b is solved by bracketing.
    """
    b = optimize.brentq(
        lambda t: (t + math.pi) * math.cos(t) - math.sin(t), 0.5, 2.0, xtol=1e-15
    )
    return -e0_closed(b), b, y0_closed(b)


@dataclass(frozen=True)
class ContourRow:
    b: float
    epsilon: float
    y: float
    e_gs: float
    trusted: bool


def contour_data(b_grid, eps_grid, max_order: int = DEFAULT_SERIES_ORDER) -> list[ContourRow]:
    """Summed series y(b; eps) and E_GS(b; eps) on the tensor grid, b-major order."""
    rows = []
    for b in b_grid:
        s = energy_series(float(b), max_order)
        for eps in eps_grid:
            if not 0.0 <= eps <= 1.0:
                raise DomainError(f"eps must lie in [0, 1], got {eps}")
            rows.append(ContourRow(float(b), float(eps), s.y_at(eps), s.e_at(eps), not s.untrusted(eps)))
    return rows


@dataclass(frozen=True)
class EpsilonOptimum:
    y: float
    epsilon: float
    b: float
    e_gs: float
    trusted: bool


class SeriesSurface:
    """Series coefficients y_k(b), E_k(b) interpolated in b on [0, pi].

    The coefficients are analytic in b (nearest singularity at b = -pi), so
    Chebyshev interpolation on ``n_nodes`` points reproduces the directly
    recursed values to round-off while making fixed-y searches cheap.
    """

    def __init__(self, max_order: int = DEFAULT_SERIES_ORDER, n_nodes: int = 48):
        self.max_order = max_order
        t = np.cos(np.pi * (np.arange(n_nodes) + 0.5) / n_nodes)
        series = [energy_series(0.5 * math.pi * (x + 1.0), max_order) for x in t]
        cheb = np.polynomial.chebyshev
        self._y_cheb = cheb.chebfit(t, np.array([s.y_coeffs for s in series]), n_nodes - 1)
        self._e_cheb = cheb.chebfit(t, np.array([s.e_coeffs for s in series]), n_nodes - 1)

    def coefficients(self, b: float) -> tuple[np.ndarray, np.ndarray]:
        t = 2.0 * b / math.pi - 1.0
        cheb = np.polynomial.chebyshev
        return cheb.chebval(t, self._y_cheb), cheb.chebval(t, self._e_cheb)

    def evaluate(self, b: float, eps: float) -> tuple[float, float, bool]:
        """Return ``(y, E_GS, trusted)`` at (b, eps)."""
        yc, ec = self.coefficients(b)
        powers = eps ** np.arange(self.max_order + 1)
        y, e = float(yc @ powers), float(ec @ powers)
        untrusted = any(last_term_dominates(c, eps) for c in (yc, ec))
        return y, e, not untrusted

    def b_for_y(self, y: float, eps: float) -> float:
        if not 0.0 < y < 1.0:
            raise DomainError(f"y must lie in (0, 1), got {y}")
        return optimize.brentq(
            lambda b: self.evaluate(b, eps)[0] - y, 0.0, math.pi, xtol=1e-14
        )

    def energy_fixed_y(self, y: float, eps: float) -> tuple[float, float, bool]:
        """Return ``(E_GS, b, trusted)`` on the fixed-y line at ``eps``."""
        b = self.b_for_y(y, eps)
        _, e, ok = self.evaluate(b, eps)
        return e, b, ok

    def optimal_epsilon(self, y: float, eps_grid) -> EpsilonOptimum:
        """Minimise E_GS over eps along the fixed-y line: grid scan, then bounded refinement."""
        eps_grid = np.asarray(eps_grid, dtype=float)
        vals = np.array([self.energy_fixed_y(y, e)[0] for e in eps_grid])
        i = int(np.argmin(vals))
        best_eps, best_val = float(eps_grid[i]), float(vals[i])
        lo = eps_grid[max(i - 1, 0)]
        hi = eps_grid[min(i + 1, len(eps_grid) - 1)]
        if hi > lo:
            res = optimize.minimize_scalar(
                lambda e: self.energy_fixed_y(y, e)[0],
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-10},
            )
            if res.fun < best_val:
                best_eps, best_val = float(res.x), float(res.fun)
        e, b, ok = self.energy_fixed_y(y, best_eps)
        return EpsilonOptimum(y, best_eps, b, e, ok)

    def global_optimum(self, eps_grid) -> EpsilonOptimum:
        """Minimum of E_GS over the whole (b, eps) surface."""

        def min_over_b(eps):
            res = optimize.minimize_scalar(
                lambda b: self.evaluate(b, eps)[1],
                bounds=(0.0, math.pi),
                method="bounded",
                options={"xatol": 1e-12},
            )
            return res.fun, res.x

        eps_grid = np.asarray(eps_grid, dtype=float)
        vals = [min_over_b(e)[0] for e in eps_grid]
        i = int(np.argmin(vals))
        eps = float(eps_grid[i])
        lo = eps_grid[max(i - 1, 0)]
        hi = eps_grid[min(i + 1, len(eps_grid) - 1)]
        if hi > lo:
            res = optimize.minimize_scalar(
                lambda e: min_over_b(e)[0], bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
            )
            if res.fun < vals[i]:
                eps = float(res.x)
        _, b = min_over_b(eps)
        y, e, ok = self.evaluate(b, eps)
        return EpsilonOptimum(y, eps, float(b), e, ok)
