"""Exact diagonalisation of H_Wolf(s) on finite rings in a fixed-p sector.

Basis states are integers whose bit i is 1 when site i is down; the sector
basis is every N-bit integer with p set bits, sorted ascending.  The
Hamiltonian is

    H_Wolf(s) = 1/(2N) sum_i {-X_i X_{i+1} - Y_i Y_{i+1} - Delta Z_i Z_{i+1} - 2 H Z_i - Delta}

with periodic boundary, so that E = tr[rho_nn h(s)] for the bond-averaged
two-site state rho_nn.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy import optimize

from .concurrence import TwoQubitState, wootters_concurrence
from .model import DomainError

log = logging.getLogger(__name__)

MAX_SITES = 14
MAX_SECTOR_DIM = 400_000
DENSE_LIMIT = 2000
DEGENERACY_TOL = 1e-9
LOG_S_GRID = np.linspace(-10.0, 0.0, 200)
# below this, eigenvalue round-off of order eps/s swamps the O(s) structure
LOG_S_FLOOR = -16.0
CONCURRENCE_MATCH_TOL = 1e-6


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class RingSpec:
    n_sites: int
    p_down: int

    def __post_init__(self):
        n, p = self.n_sites, self.p_down
        if not 2 <= n <= MAX_SITES:
            dim = math.comb(n, p) if 0 <= p <= n else 0
            raise DomainError(
                f"N={n} outside supported range [2, {MAX_SITES}] (sector dimension {dim})"
            )
        if not 0 <= p <= n:
            raise DomainError(f"p must satisfy 0 <= p <= N, got p={p}, N={n}")
        if self.dimension > MAX_SECTOR_DIM:
            raise DomainError(f"sector dimension {self.dimension} exceeds {MAX_SECTOR_DIM}")

    @property
    def dimension(self) -> int:
        return math.comb(self.n_sites, self.p_down)

    @property
    def magnetization(self) -> float:
        return 1.0 - 2.0 * self.p_down / self.n_sites


def wolf_parameters(s: float, field_sign: int = 1) -> tuple[float, float]:
    """Delta(s) and field H(s); any s > 0, ``field_sign=-1`` flips the field."""
    if not s > 0:
        raise DomainError(f"s must be positive, got {s}")
    return -0.5 * (s + 1.0 / s), -0.5 * field_sign * (s - 1.0 / s)


@lru_cache(maxsize=64)
def sector_basis(n_sites: int, p_down: int) -> np.ndarray:
    states = [sum(1 << i for i in c) for c in combinations(range(n_sites), p_down)]
    return np.array(sorted(states), dtype=np.int64)


@dataclass(frozen=True)
class SectorOperators:
    """Pieces of H_Wolf with H = hop + Delta * zz + H * z, diagonal parts as vectors."""

    spec: RingSpec
    basis: np.ndarray
    hop: sp.csr_matrix
    zz: np.ndarray
    z: np.ndarray

    def diagonal(self, s: float, field_sign: int = 1) -> np.ndarray:
        # Delta zz + H z regrouped as -(s/2)(zz +- z) - (1/2s)(zz -+ z): the 1/s
        # part vanishes exactly on states free of the penalised pairs, so
        # small s costs no precision
        if not s > 0:
            raise DomainError(f"s must be positive, got {s}")
        plus, minus = self.zz + self.z, self.zz - self.z
        if field_sign < 0:
            plus, minus = minus, plus
        return -0.5 * s * plus - 0.5 / s * minus

    def hamiltonian(self, s: float, field_sign: int = 1) -> sp.csr_matrix:
        return (self.hop + sp.diags(self.diagonal(s, field_sign))).tocsr()


def _bits(states: np.ndarray, site: int) -> np.ndarray:
    return (states >> site) & 1


@lru_cache(maxsize=64)
def sector_operators(n_sites: int, p_down: int) -> SectorOperators:
    spec = RingSpec(n_sites, p_down)
    n = n_sites
    basis = sector_basis(n, p_down)
    dim = len(basis)
    zz = np.zeros(dim)
    rows, cols = [], []
    for i in range(n):
        j = (i + 1) % n
        zi = 1 - 2 * _bits(basis, i)
        zj = 1 - 2 * _bits(basis, j)
        zz += -zi * zj - 1.0
        flip = np.nonzero(zi != zj)[0]
        target = basis[flip] ^ ((1 << i) | (1 << j))
        rows.append(flip)
        cols.append(np.searchsorted(basis, target))
    z_total = sum(1 - 2 * _bits(basis, i) for i in range(n)).astype(float)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    # -(XX + YY) = -2 (S+S- + S-S+) between antiparallel neighbours
    hop = sp.coo_matrix((np.full(len(rows), -1.0 / n), (rows, cols)), shape=(dim, dim)).tocsr()
    hop.sum_duplicates()
    return SectorOperators(spec, basis, hop, zz / (2 * n), -z_total / n)


def build_sector_hamiltonian(spec: RingSpec, s: float, field_sign: int = 1) -> sp.csr_matrix:
    """Sparse H_Wolf(s) restricted to the p-down sector of ``spec``."""
    return sector_operators(spec.n_sites, spec.p_down).hamiltonian(s, field_sign)


def full_space_hamiltonian(n_sites: int, s: float, field_sign: int = 1) -> np.ndarray:
    """Dense H_Wolf(s) on all 2^N states built from Kronecker products (test oracle)."""
    from .model import IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z

    delta, field = wolf_parameters(s, field_sign)

    def site_op(op, i):
        # site i is bit i, i.e. the (N-1-i)-th kron factor
        mats = [IDENTITY2] * n_sites
        mats[n_sites - 1 - i] = op
        out = mats[0]
        for m in mats[1:]:
            out = np.kron(out, m)
        return out

    dim = 2**n_sites
    h = np.zeros((dim, dim), dtype=complex)
    for i in range(n_sites):
        j = (i + 1) % n_sites
        h -= site_op(PAULI_X, i) @ site_op(PAULI_X, j)
        h -= site_op(PAULI_Y, i) @ site_op(PAULI_Y, j)
        h -= delta * site_op(PAULI_Z, i) @ site_op(PAULI_Z, j)
        h -= 2 * field * site_op(PAULI_Z, i)
        h -= delta * np.eye(dim)
    return (h / (2 * n_sites)).real


def translation_permutation(n_sites: int, p_down: int) -> np.ndarray:
    """Index map of the cyclic shift site i -> i + 1 on the sector basis."""
    basis = sector_basis(n_sites, p_down)
    mask = (1 << n_sites) - 1
    shifted = ((basis << 1) | (basis >> (n_sites - 1))) & mask
    return np.searchsorted(basis, shifted)


def _lowest(h: sp.csr_matrix, k: int) -> tuple[np.ndarray, np.ndarray]:
    dim = h.shape[0]
    if dim <= DENSE_LIMIT:
        w, v = scipy.linalg.eigh(h.toarray(), subset_by_index=[0, min(k, dim) - 1])
        return w, v
    try:
        w, v = spla.eigsh(h, k=min(k, dim - 1), which="SA", tol=1e-12, maxiter=20 * dim)
    except spla.ArpackNoConvergence as exc:
        raise EigensolverError(f"Lanczos did not converge: {exc}") from exc
    order = np.argsort(w)
    w, v = w[order], v[:, order]
    res = np.linalg.norm(h @ v[:, 0] - w[0] * v[:, 0])
    if res > 1e-8:
        raise EigensolverError(f"ground-state residual {res:.3e}")
    return w, v


def sector_energy(spec: RingSpec, s: float, field_sign: int = 1) -> float:
    """Lowest eigenvalue of H_Wolf(s) in the sector."""
    h = build_sector_hamiltonian(spec, s, field_sign)
    if h.shape[0] <= DENSE_LIMIT:
        return float(scipy.linalg.eigh(h.toarray(), eigvals_only=True, subset_by_index=[0, 0])[0])
    return float(_lowest(h, 1)[0][0])


def bond_density_matrices(spec: RingSpec, vectors: np.ndarray, weights=None) -> list[np.ndarray]:
    """Two-site reduced states of every bond (i, i+1) for a mixture of sector vectors."""
    n = spec.n_sites
    basis = sector_basis(n, spec.p_down)
    vectors = np.atleast_2d(np.asarray(vectors).T).T
    if weights is None:
        weights = np.full(vectors.shape[1], 1.0 / vectors.shape[1])
    out = [np.zeros((4, 4), dtype=complex) for _ in range(n)]
    for wgt, vec in zip(weights, vectors.T):
        full = np.zeros(2**n, dtype=complex)
        full[basis] = vec
        # C-order reshape puts bit N-1 first, so site i lives on axis N-1-i
        psi = full.reshape((2,) * n)
        for i in range(n):
            j = (i + 1) % n
            a = np.moveaxis(psi, (n - 1 - i, n - 1 - j), (0, 1)).reshape(4, -1)
            out[i] += wgt * (a @ a.conj().T)
    return out


@dataclass(frozen=True)
class RingState:
    spec: RingSpec
    s: float
    energy: float
    ground_vector: np.ndarray
    nn_rho: TwoQubitState
    degeneracy: int = 1
    field_sign: int = 1


def _momentum_zero_vector(spec: RingSpec, space: np.ndarray) -> np.ndarray | None:
    perm = translation_permutation(spec.n_sites, spec.p_down)
    # (T v)[perm[k]] = v[k]
    shifted = np.empty_like(space)
    shifted[perm] = space
    t = space.conj().T @ shifted
    w, u = np.linalg.eig(t)
    k0 = np.nonzero(np.abs(w - 1.0) < 1e-8)[0]
    if len(k0) == 0:
        return None
    vec = space @ u[:, k0[0]]
    return vec / np.linalg.norm(vec)


def _ground_space(spec: RingSpec, s: float, field_sign: int) -> tuple[np.ndarray, np.ndarray]:
    h = build_sector_hamiltonian(spec, s, field_sign)
    k = min(6, spec.dimension)
    w, v = _lowest(h, k)
    n_deg = int(np.sum(w - w[0] < DEGENERACY_TOL * max(1.0, abs(w[0]))))
    return w[:n_deg], v[:, :n_deg]


def _state_from_space(spec, s, field_sign, energies, space, weights=None) -> RingState:
    bonds = bond_density_matrices(spec, space, weights)
    rho = sum(bonds) / spec.n_sites
    rho = 0.5 * (rho + rho.conj().T)
    return RingState(
        spec, s, float(energies[0]), space[:, 0], TwoQubitState(rho), space.shape[1], field_sign
    )


def ground_state(spec: RingSpec, s: float, field_sign: int = 1) -> RingState:
    """Sector ground state of H_Wolf(s) and its bond-averaged two-site state.

    For a degenerate ground level the momentum-zero member is used when one
    exists; otherwise the equal mixture over the level, which is itself
    translation invariant.
    """
    energies, space = _ground_space(spec, s, field_sign)
    if space.shape[1] > 1:
        vec = _momentum_zero_vector(spec, space)
        if vec is not None:
            return _state_from_space(spec, s, field_sign, energies, vec[:, None])
    return _state_from_space(spec, s, field_sign, energies, space)


def _stationary_state(spec: RingSpec, s: float, field_sign: int) -> RingState:
    """Ground state at an s-optimum whose energy is stationary in s.

    At a level crossing no single eigenvector has d<h(s)>/ds = 0; a mixture
    of the d/ds extremes within the degenerate level does.
    """
    energies, space = _ground_space(spec, s, field_sign)
    if space.shape[1] == 1:
        return _state_from_space(spec, s, field_sign, energies, space)
    ops = sector_operators(spec.n_sites, spec.p_down)
    # dH/ds with Delta' = -(1 - 1/s^2)/2, H' = -field_sign (1 + 1/s^2)/2
    d_delta = -0.5 * (1.0 - 1.0 / s**2)
    d_field = -0.5 * field_sign * (1.0 + 1.0 / s**2)
    deriv = d_delta * ops.zz + d_field * ops.z
    m = space.conj().T @ (deriv[:, None] * space)
    dw, du = np.linalg.eigh(0.5 * (m + m.conj().T))
    lo, hi = dw[0], dw[-1]
    vecs = space @ du[:, [0, -1]]
    if hi - lo < 1e-14 or lo > 0 or hi < 0:
        return _state_from_space(spec, s, field_sign, energies, space)
    t = hi / (hi - lo)
    return _state_from_space(spec, s, field_sign, energies, vecs, [t, 1.0 - t])


def small_s_limit(spec: RingSpec, field_sign: int = 1) -> RingState:
    """Sector ground state in the limit s -> 0 (Delta -> -inf along the curve).

    The 1/s part of H_Wolf is a non-negative diagonal penalty, so the limit
    energy is the lowest level of the hopping term on the penalty-free states.
    The returned state carries ``s = 0``.
    """
    ops = sector_operators(spec.n_sites, spec.p_down)
    penalty = ops.zz - ops.z if field_sign > 0 else ops.zz + ops.z
    free = np.nonzero(np.abs(penalty) < 1e-12)[0]
    if len(free) == 0:
        raise DomainError(
            f"no penalty-free states for N={spec.n_sites}, p={spec.p_down}; the s -> 0 energy diverges"
        )
    h = ops.hop[free][:, free].toarray()
    w, v = scipy.linalg.eigh(h)
    n_deg = int(np.sum(w - w[0] < DEGENERACY_TOL * max(1.0, abs(w[0]))))
    space = np.zeros((spec.dimension, n_deg))
    space[free] = v[:, :n_deg]
    if n_deg > 1:
        vec = _momentum_zero_vector(spec, space)
        if vec is not None:
            space = vec[:, None]
    bonds = bond_density_matrices(spec, space)
    rho = sum(bonds) / spec.n_sites
    return RingState(
        spec, 0.0, float(w[0]), space[:, 0], TwoQubitState(0.5 * (rho + rho.conj().T)),
        space.shape[1], field_sign,
    )


@dataclass(frozen=True)
class CmaxResult:
    c_max: float
    s_star: float
    energy: float
    concurrence: float
    boundary: bool
    state: RingState


def cmax_details(spec: RingSpec, field_sign: int = 1, check: bool = True) -> CmaxResult:
    """Full record of the s-optimisation behind :func:`cmax_fixed_p`.

    Scans log s on [-10, 0] and refines with a bounded scalar minimiser.  If
    the scan minimum sits on the lower edge, the exact s -> 0 limit is
    compared; when it is lower the optimum is reported with ``s_star = 0``
    and ``boundary = True``.  With ``check`` the Wootters concurrence of the
    optimal two-site state must reproduce the result.
    """

    def energy(log_s):
        return sector_energy(spec, math.exp(log_s), field_sign)

    grid = LOG_S_GRID
    vals = np.array([energy(x) for x in grid])
    i = int(np.argmin(vals))
    boundary = False
    state = None
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if i == 0:
        try:
            limit = small_s_limit(spec, field_sign)
        except DomainError:
            limit = None
        if limit is not None and limit.energy <= vals[0]:
            boundary = True
            state = limit
            log.info("s-optimum for N=%d, p=%d is the s -> 0 limit", spec.n_sites, spec.p_down)
        else:
            lo = LOG_S_FLOOR
    if boundary:
        s_star, e_star = 0.0, state.energy
    else:
        log_s, e_star = float(grid[i]), float(vals[i])
        res = optimize.minimize_scalar(
            energy, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10}
        )
        if res.fun < e_star:
            log_s, e_star = float(res.x), float(res.fun)
        s_star = math.exp(log_s)
        state = _stationary_state(spec, s_star, field_sign)
    c_max = max(0.0, -e_star)
    conc = wootters_concurrence(state.nn_rho)
    if check and abs(conc - c_max) > CONCURRENCE_MATCH_TOL:
        raise EigensolverError(
            f"concurrence {conc:.10f} of the optimal state differs from -E = {c_max:.10f} "
            f"(N={spec.n_sites}, p={spec.p_down}, s={s_star:.6g})"
        )
    return CmaxResult(c_max, s_star, e_star, conc, boundary, state)


def cmax_fixed_p(spec: RingSpec, field_sign: int = 1) -> tuple[float, float]:
    """C^max(N, p) = max{0, -inf_s E_GS}; returns ``(c_max, s_star)``.

    ``s_star = 0`` marks an optimum in the s -> 0 limit.
    """
    res = cmax_details(spec, field_sign)
    return res.c_max, res.s_star


def cmax_overall(n_sites: int) -> tuple[float, int]:
    """Maximise :func:`cmax_fixed_p` over p in [0, N/2]; returns ``(c_max, p_star)``."""
    if n_sites > 12:
        raise DomainError(f"cmax_overall supports N <= 12, got {n_sites}")
    best = (-1.0, 0)
    for p in range(n_sites // 2 + 1):
        c = cmax_fixed_p(RingSpec(n_sites, p))[0]
        if c > best[0] + 1e-12:
            best = (c, p)
    return best
