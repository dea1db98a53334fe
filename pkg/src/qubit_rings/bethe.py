"""Nystrom solution of the Yang-Yang density equation for Delta < -1.

The integral equation

    R(a) = dp/da - 1/(2 pi) int_{-b}^{b} dtheta/db(a, c) R(c) dc

is discretised on a Gauss-Legendre rule and solved as a dense linear system.
From R the magnetisation y, the energy density f and the ground-state energy
of the parent Hamiltonian H_Wolf(s) in the sector fixed by b follow by
quadrature.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy import optimize

from .model import CurvePoint, DomainError, curve_point_from_delta
from .quadrature import DEFAULT_ORDER, QuadratureRule, gauss_legendre

log = logging.getLogger(__name__)

DELTA_MARGIN = 1e-6
RESIDUAL_TOL = 1e-10
Y_TOL = 1e-10
B_XTOL = 1e-8


class NumericalError(RuntimeError):
    """A numerical routine failed to meet its accuracy contract."""


def dp_dalpha(alpha, lam: float):
    """sinh(lam) / (cosh(lam) - cos(alpha)) without cancellation near lam = 0."""
    alpha = np.asarray(alpha, dtype=float)
    den = 2.0 * math.sinh(0.5 * lam) ** 2 + 2.0 * np.sin(0.5 * alpha) ** 2
    return math.sinh(lam) / den


def dtheta_dbeta(alpha, beta, lam: float):
    """sinh(2 lam) / (cosh(2 lam) - cos(alpha - beta))."""
    diff = np.subtract(alpha, beta)
    den = 2.0 * math.sinh(lam) ** 2 + 2.0 * np.sin(0.5 * diff) ** 2
    return math.sinh(2.0 * lam) / den


@dataclass(frozen=True)
class DensitySolution:
    point: CurvePoint
    b: float
    rule: QuadratureRule | None
    R_values: np.ndarray
    y: float
    f: float
    e_gs: float
    residual: float = 0.0

    @property
    def nodes(self) -> np.ndarray:
        return np.zeros(1) if self.rule is None else self.rule.nodes


def _check_point(point: CurvePoint, unsafe: bool) -> None:
    if point.delta >= -1.0:
        raise DomainError(f"delta must be < -1, got {point.delta}")
    if not unsafe and point.delta > -1.0 - DELTA_MARGIN:
        raise DomainError(
            f"delta={point.delta} is within {DELTA_MARGIN} of -1; pass unsafe=True to override"
        )


def _check_b(b: float) -> None:
    if not 0.0 <= b <= math.pi:
        raise DomainError(f"b must lie in [0, pi], got {b}")


def egs_from_f(point: CurvePoint, f: float, y: float) -> float:
    """Ground-state energy of H_Wolf(s) per site from f(Delta, y)."""
    return 2.0 * f - point.field * y - 0.5 * point.delta


def nystrom_system(point: CurvePoint, rule: QuadratureRule) -> tuple[np.ndarray, np.ndarray]:
    """Matrix ``1 + K~`` and right-hand side ``xi`` of the discretised equation."""
    x = rule.nodes
    kernel = dtheta_dbeta(x[:, None], x[None, :], point.lam) / (2.0 * math.pi)
    matrix = np.eye(rule.order) + kernel * rule.weights[None, :]
    return matrix, dp_dalpha(x, point.lam)


def solve_density(
    point: CurvePoint, b: float, order: int = DEFAULT_ORDER, unsafe: bool = False
) -> DensitySolution:
    """Solve the density equation on [-b, b] and derive y, f and E_GS."""
    _check_point(point, unsafe)
    _check_b(b)
    if b == 0.0:
        # empty interval: R = dp/da, every spin up
        r0 = dp_dalpha(np.zeros(1), point.lam)
        f = -0.25 * point.delta
        return DensitySolution(point, 0.0, None, r0, 1.0, f, egs_from_f(point, f, 1.0))

    rule = gauss_legendre(order, -b, b)
    matrix, xi = nystrom_system(point, rule)
    try:
        lu = scipy.linalg.lu_factor(matrix, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"Nystrom matrix could not be factorised: {exc}") from exc
    if np.any(np.abs(np.diag(lu[0])) < 1e-14):
        raise NumericalError("Nystrom matrix is singular")
    r = scipy.linalg.lu_solve(lu, xi)
    residual = float(np.max(np.abs(matrix @ r - xi)))
    if residual > RESIDUAL_TOL * max(1.0, float(np.max(np.abs(xi)))):
        raise NumericalError(f"Nystrom residual {residual:.3e} exceeds tolerance")

    y = 1.0 - rule.integrate(r) / math.pi
    f = -0.25 * point.delta - math.sinh(point.lam) / (2.0 * math.pi) * rule.integrate(
        r * xi
    )
    return DensitySolution(point, float(b), rule, r, y, f, egs_from_f(point, f, y), residual)


def egs_wolf(point: CurvePoint, b: float, order: int = DEFAULT_ORDER, unsafe: bool = False) -> float:
    """E_GS[H_Wolf(s), p] with p fixed implicitly through the integration limit b."""
    return solve_density(point, b, order, unsafe).e_gs


def solve_for_y(
    point: CurvePoint, y_target: float, order: int = DEFAULT_ORDER, unsafe: bool = False
) -> DensitySolution:
    """Find the integration limit b whose solution has magnetisation ``y_target``.

    y(b) decreases monotonically from y(0) = 1 to y(pi), so a bracketing
    root finder on [0, pi] is sufficient.
    """
    _check_point(point, unsafe)
    if not 0.0 <= y_target <= 1.0:
        raise DomainError(f"y_target must lie in [0, 1], got {y_target}")
    if y_target == 1.0:
        return solve_density(point, 0.0, order, unsafe)

    top = solve_density(point, math.pi, order, unsafe)
    if abs(top.y - y_target) <= Y_TOL:
        return top
    if y_target < top.y:
        raise DomainError(
            f"y_target={y_target} outside achievable range [{top.y:.12g}, 1] at delta={point.delta}"
        )

    def gap(b):
        return solve_density(point, b, order, unsafe).y - y_target

    b_star = optimize.brentq(gap, 0.0, math.pi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    sol = solve_density(point, b_star, order, unsafe)
    if abs(sol.y - y_target) > Y_TOL:
        raise NumericalError(f"|y(b) - y_target| = {abs(sol.y - y_target):.3e} after root finding")
    return sol


def optimize_over_b(
    point: CurvePoint, order: int = DEFAULT_ORDER, unsafe: bool = False
) -> tuple[float, float]:
    """Minimise E_GS over b in [0, pi]; returns ``(b_star, e_gs_star)``."""
    _check_point(point, unsafe)
    res = optimize.minimize_scalar(
        lambda b: egs_wolf(point, b, order, unsafe),
        bounds=(0.0, math.pi),
        method="bounded",
        options={"xatol": B_XTOL * 0.1, "maxiter": 500},
    )
    if not res.success:
        raise NumericalError(f"b optimisation failed: {res.message}")
    b_star = float(res.x)
    if math.pi - b_star < 10 * B_XTOL:
        warnings.warn(
            f"optimum over b sits at the b = pi boundary for delta={point.delta}",
            RuntimeWarning,
            stacklevel=2,
        )
    return b_star, egs_wolf(point, b_star, order, unsafe)


def optimize_at_fixed_y(
    y: float, eps_bounds: tuple[float, float] = (0.02, 0.98), order: int = DEFAULT_ORDER
) -> tuple[float, float]:
    """Minimise E_GS over delta = -1/eps at fixed magnetisation; returns ``(delta_star, e_gs_star)``."""
    lo, hi = eps_bounds
    if not 0.0 < lo < hi < 1.0:
        raise DomainError(f"eps bounds must satisfy 0 < lo < hi < 1, got {eps_bounds}")
    res = optimize.minimize_scalar(
        lambda eps: solve_for_y(curve_point_from_delta(-1.0 / eps), y, order).e_gs,
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": 1e-8},
    )
    if min(res.x - lo, hi - res.x) < 1e-6:
        warnings.warn(f"fixed-y optimum at y={y} sits on the eps bound", RuntimeWarning, stacklevel=2)
    return -1.0 / float(res.x), float(res.fun)


@dataclass(frozen=True)
class ScanRow:
    delta: float
    minus_egs: float
    b_star: float
    y_star: float
    error: str | None = None


def scan_delta(deltas, order: int = DEFAULT_ORDER) -> list[ScanRow]:
    """-E_GS optimised over b for each Delta; failures are recorded per row."""
    rows = []
    for delta in deltas:
        try:
            point = _point_for_delta(delta)
            b_star, e_star = optimize_over_b(point, order)
            y_star = solve_density(point, b_star, order).y
            rows.append(ScanRow(float(delta), -e_star, b_star, y_star))
        except (DomainError, NumericalError) as exc:
            log.warning("scan point delta=%s failed: %s", delta, exc)
            rows.append(ScanRow(float(delta), math.nan, math.nan, math.nan, str(exc)))
    return rows


def _point_for_delta(delta: float) -> CurvePoint:
    if not delta < -1.0:
        raise DomainError(f"delta must be < -1, got {delta}")
    return curve_point_from_delta(delta)
