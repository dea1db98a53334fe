"""Two-qubit concurrence: Wootters' closed formula and the variational form.

The variational form writes the concurrence as

    C(rho) = max{0, -inf_{s, U, V} tr[(U x V)^+ rho (U x V) h(s)]}

with U, V in SU(2) and h(s) the two-site operator of :mod:`qubit_rings.model`.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .model import PAULI_Y, DomainError

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
# eigenvalues of rho below this fraction of the largest are treated as zero
RANK_TOL = 1e-13
LOG_S_BOUND = 20.0
DEFAULT_RESTARTS = 20
RESTART_AGREEMENT = 1e-9

_YY = np.kron(PAULI_Y, PAULI_Y)


@dataclass(frozen=True)
class TwoQubitState:
    """Density matrix in the basis (up-up, up-down, down-up, down-down)."""

    rho: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise DomainError(f"two-qubit density matrix must be 4x4, got {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITIAN_TOL:
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(rho) - 1.0) > TRACE_TOL:
            raise DomainError(f"density matrix has trace {np.trace(rho).real}")
        if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
            raise DomainError("density matrix is not positive semidefinite")
        object.__setattr__(self, "rho", rho)

    @classmethod
    def from_ket(cls, psi) -> "TwoQubitState":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))


def random_density_matrix(rng: np.random.Generator, rank: int | None = None) -> TwoQubitState:
    """Ginibre-distributed two-qubit state; ``rank`` defaults to a random 1..4."""
    rank = int(rng.integers(1, 5)) if rank is None else rank
    g = rng.normal(size=(4, rank)) + 1j * rng.normal(size=(4, rank))
    rho = g @ g.conj().T
    rho /= np.trace(rho).real
    return TwoQubitState(0.5 * (rho + rho.conj().T))


def _as_rho(state) -> np.ndarray:
    if isinstance(state, TwoQubitState):
        return state.rho
    return TwoQubitState(state).rho


def spin_flip(rho: np.ndarray) -> np.ndarray:
    return _YY @ rho.conj() @ _YY


def wootters_concurrence(state) -> float:
    """Concurrence max{l1 - l2 - l3 - l4, 0}.

    With rho = V V^+ the l_i are the singular values of V^T (Y x Y) V, the
    same numbers as the square roots of the spectrum of rho rho~.  Working
    with singular values keeps zero l_i at round-off level instead of the
    square root of round-off.
    """
    rho = _as_rho(state)
    w, v = np.linalg.eigh(rho)
    keep = w > RANK_TOL * max(w[-1], 0.0)
    factor = v[:, keep] * np.sqrt(w[keep])
    tau = factor.T @ _YY @ factor
    lam = np.zeros(4)
    sv = np.linalg.svd(tau, compute_uv=False)
    lam[: len(sv)] = sv
    return float(max(lam[0] - lam[1] - lam[2] - lam[3], 0.0))


def flip_operator() -> np.ndarray:
    """Swap of the two qubits."""
    f = np.zeros((4, 4))
    f[0, 0] = f[3, 3] = 1.0
    f[1, 2] = f[2, 1] = 1.0
    return f


def su2_from_vector(x) -> np.ndarray:
    """exp(i (x . sigma)): rotation by angle |x| about the axis x/|x|."""
    a, b, c = (float(t) for t in x)
    angle = math.sqrt(a * a + b * b + c * c)
    sinc = math.sin(angle) / angle if angle > 1e-8 else 1.0 - angle * angle / 6.0
    co = math.cos(angle)
    return np.array(
        [[co + 1j * sinc * c, sinc * (b + 1j * a)], [sinc * (-b + 1j * a), co - 1j * sinc * c]]
    )


@dataclass(frozen=True)
class VariationalFrame:
    s: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if not self.s > 0:
            raise DomainError(f"s must be positive, got {self.s}")
        for name in ("u", "v"):
            m = np.asarray(getattr(self, name), dtype=complex)
            if m.shape != (2, 2):
                raise DomainError(f"{name} must be 2x2")
            if abs(np.linalg.det(m) - 1.0) > 1e-12:
                raise DomainError(f"{name} must have unit determinant")
            if np.max(np.abs(m.conj().T @ m - np.eye(2))) > 1e-12:
                raise DomainError(f"{name} must be unitary")
            object.__setattr__(self, name, m)

    @classmethod
    def from_params(cls, params) -> "VariationalFrame":
        """Frame from ``(log s, u-vector, v-vector)`` packed in 7 reals."""
        params = np.asarray(params, dtype=float)
        return cls(float(np.exp(params[0])), su2_from_vector(params[1:4]), su2_from_vector(params[4:7]))


def _value(rho: np.ndarray, s: float, u: np.ndarray, v: np.ndarray) -> float:
    w = (u[:, None, :, None] * v[None, :, None, :]).reshape(4, 4)
    rotated = w.conj().T @ rho @ w
    # h(s) touches only these four entries
    val = s * rotated[0, 0] + rotated[3, 3] / s - rotated[1, 2] - rotated[2, 1]
    return float(val.real)


def variational_value(state, frame: VariationalFrame) -> float:
    """tr[(U x V)^+ rho (U x V) h(s)]."""
    return _value(_as_rho(state), frame.s, frame.u, frame.v)


def variational_minimize(
    state, restarts: int = DEFAULT_RESTARTS, rng: np.random.Generator | int | None = None
) -> float:
    """Concurrence from numerically minimising the variational form.

    Minimises over (log s, U, V) with L-BFGS-B from ``restarts`` random
    starting frames and returns max{0, -minimum}.
    """
    if restarts < 1:
        raise DomainError(f"need at least one restart, got {restarts}")
    rho = _as_rho(state)
    rng = np.random.default_rng(rng)

    def objective(p):
        return _value(rho, np.exp(p[0]), su2_from_vector(p[1:4]), su2_from_vector(p[4:7]))

    bounds = [(-LOG_S_BOUND, LOG_S_BOUND)] + [(None, None)] * 6
    results = []
    for _ in range(restarts):
        x0 = np.concatenate([rng.uniform(-2.0, 2.0, 1), rng.uniform(-np.pi, np.pi, 6)])
        results.append(
            optimize.minimize(
                objective,
                x0,
                method="L-BFGS-B",
                bounds=bounds,
                options={"ftol": 1e-14, "gtol": 1e-9, "maxiter": 2000},
            )
        )
    best = min(results, key=lambda r: r.fun)
    # line-search exits at the round-off floor are fine when independent starts agree
    agreeing = sum(abs(r.fun - best.fun) <= RESTART_AGREEMENT for r in results)
    if not best.success and agreeing < 2:
        warnings.warn(
            f"variational minimisation did not converge: {best.message}; best value {best.fun:.12g}",
            RuntimeWarning,
            stacklevel=2,
        )
    if abs(best.x[0]) >= LOG_S_BOUND - 1e-6 and best.fun < 0:
        log.info("variational optimum sits on the log s bound (value %.3e)", best.fun)
    return max(0.0, -float(best.fun))
