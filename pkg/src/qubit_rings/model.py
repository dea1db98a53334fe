"""Parent-Hamiltonian parameters, the two-site operator h(s) and closed formulas.

Two-qubit operators use the fixed basis order (up-up, up-down, down-up,
down-down), i.e. index ``2*a + b`` with 0 = up and 1 = down for qubits a, b.
Every module in the package relies on this ordering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# O'Connor-Wootters optimum of the infinite ring, reproduced in perturbation.ow_optimum
OW_CONCURRENCE = 0.434467
OW_B = 1.351802
OW_Y = 0.398316

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)


class DomainError(ValueError):
    """An argument lies outside the region where a formula is defined."""


@dataclass(frozen=True)
class CurvePoint:
    """Point on the positive-field branch of the hyperbola Delta^2 - H^2 = 1."""

    s: float
    delta: float
    field: float
    lam: float
    epsilon: float


def curve_point_from_s(s: float) -> CurvePoint:
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    delta = -0.5 * (s + 1.0 / s)
    field = -0.5 * (s - 1.0 / s)
    return CurvePoint(s=s, delta=delta, field=field, lam=-math.log(s), epsilon=1.0 / abs(delta))


def curve_point_from_delta(delta: float) -> CurvePoint:
    """Invert :func:`curve_point_from_s`; the field is +sqrt(delta^2 - 1)."""
    if not delta <= -1.0:
        raise DomainError(f"delta must be <= -1, got {delta}")
    lam = math.acosh(-delta)
    # s = exp(-lam) = -delta - sqrt(delta^2 - 1), written without cancellation
    return CurvePoint(
        s=math.exp(-lam),
        delta=float(delta),
        field=math.sinh(lam),
        lam=lam,
        epsilon=-1.0 / delta,
    )


def h_matrix(s: float) -> np.ndarray:
    """Two-site operator h(s) as a real symmetric 4x4 array."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    h = np.zeros((4, 4))
    h[0, 0] = s
    h[3, 3] = 1.0 / s
    h[1, 2] = h[2, 1] = -1.0
    return h


def h_matrix_pauli(s: float) -> np.ndarray:
    """h(s) assembled from Pauli products; agrees with :func:`h_matrix`."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    xx = np.kron(PAULI_X, PAULI_X)
    yy = np.kron(PAULI_Y, PAULI_Y)
    zz = np.kron(PAULI_Z, PAULI_Z)
    z_sum = np.kron(PAULI_Z, IDENTITY2) + np.kron(IDENTITY2, PAULI_Z)
    one = np.eye(4)
    h = 0.5 * (-xx - yy + 0.5 * (s + 1 / s) * (zz + one) + 0.5 * (s - 1 / s) * z_sum)
    return h.real


def ow_concurrence(n_sites: int, p_down: int) -> float:
    """Closed-form O'Connor-Wootters concurrence for N sites with p down spins.

    Valid for ``0 <= p <= N/2``; larger p is the same problem with up and
    down exchanged and must be passed as ``N - p``.
    """
    n, p = int(n_sites), int(p_down)
    if n < 2:
        raise DomainError(f"need at least 2 sites, got {n}")
    if p < 0 or 2 * p > n:
        raise DomainError(f"p must satisfy 0 <= p <= N/2, got p={p}, N={n}")
    if n - p < 2:
        raise DomainError("N - p must be at least 2")
    num = math.sin(p * math.pi / (n - p))
    den = n * math.sin(math.pi / (n - p))
    # sin(p pi/(N-p)) is 0 up to round-off at p = N/2
    if 2 * p == n or num <= 0.0:
        return 0.0
    return 2.0 * num / den


def b_from_y0(y: float) -> float:
    """Invert y0(b) = (1 - b/pi)/(1 + b/pi)."""
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"y must lie in [0, 1], got {y}")
    return math.pi * (1.0 - y) / (1.0 + y)


def ow_asymptotic_limit(y: float) -> float:
    """N -> infinity limit of :func:`ow_concurrence` at magnetization y = 1 - 2p/N."""
    b = b_from_y0(y)
    return 2.0 * math.sin(b) / (b + math.pi)


def optimal_field(y: float, p_down_down: float) -> float:
    """Stationary field y / (2 sqrt(P) sqrt(P + y)) at fixed magnetization.

    ``P`` is the probability that two neighbouring spins are both down.
    Returns ``math.inf`` when P = 0 and y > 0 (optimum pushed to Delta -> -inf).
    """
    if y < 0 or p_down_down < 0:
        raise DomainError(f"need y >= 0 and P >= 0, got y={y}, P={p_down_down}")
    if y == 0:
        return 0.0
    if p_down_down == 0:
        return math.inf
    return y / (2.0 * math.sqrt(p_down_down) * math.sqrt(p_down_down + y))


def field_lower_bound(y: float) -> float:
    """Lower bound on the optimal field from P <= (y + 1)/2."""
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"y must lie in [0, 1], got {y}")
    return y / (math.sqrt(y + 1.0) * math.sqrt(3.0 * y + 1.0))
