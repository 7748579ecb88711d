"""History Fock spaces: truncated bosons and exact fermions.

Basis states are occupation tuples over the ``L = N*M`` flat modes, ordered
row-major (flat mode 0 is the most significant digit). Fermionic operators
use the Jordan-Wigner string over lower flat indices, so a basis state is
``prod_{i ascending} (b_i^dag)^{n_i} |0>``.

Bosonic truncation keeps at most ``n_max`` quanta per flat mode. Number
conserving operators never leave a total-number sector, and every sector with
total ``n <= n_max`` is represented without truncation. Those sectors form the
*faithful subspace*, on which the bosonic engine is exact.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product
from math import factorial

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.stats import poisson

from .errors import DimensionError, InvalidArgumentError, UnsupportedError
from .lattice import TimeLattice

DEFAULT_MAX_DIM = 2**20


def max_dim() -> int:
    env = os.environ.get("HISTLAT_MAX_DIM")
    return int(env) if env else DEFAULT_MAX_DIM


@dataclass(frozen=True)
class FockSpec:
    statistics: str
    n_flat: int
    n_max: int = 1
    lattice: TimeLattice | None = field(default=None, compare=False)
    n_modes: int = 1

    def __post_init__(self):
        if self.statistics not in ("bose", "fermi"):
            raise InvalidArgumentError(f"unknown statistics {self.statistics!r}")
        if self.statistics == "fermi":
            object.__setattr__(self, "n_max", 1)
        if self.n_max < 1 or self.n_flat < 1:
            raise InvalidArgumentError("n_flat and n_max must be positive")
        if self.dim > max_dim():
            raise DimensionError(self.dim, max_dim())

    @property
    def local_dim(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return self.local_dim**self.n_flat

    @property
    def is_fermi(self) -> bool:
        return self.statistics == "fermi"

    @cached_property
    def occupations(self) -> np.ndarray:
        d, L = self.local_dim, self.n_flat
        idx = np.arange(self.dim)
        occ = np.empty((self.dim, L), dtype=np.int64)
        for i in range(L - 1, -1, -1):
            occ[:, i] = idx % d
            idx //= d
        return occ

    @cached_property
    def totals(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def index_of(self, occ) -> int:
        idx = 0
        for n in occ:
            idx = idx * self.local_dim + int(n)
        return idx

    @cached_property
    def annihilators(self) -> list[sp.csr_matrix]:
        d = self.local_dim
        a = sp.diags(np.sqrt(np.arange(1, d)), 1, shape=(d, d), format="csr")
        z = sp.diags([1.0, -1.0], format="csr")
        eye = sp.identity(d, format="csr")
        ops = []
        for i in range(self.n_flat):
            left = z if self.is_fermi else eye
            op = sp.identity(1, format="csr")
            for k in range(self.n_flat):
                op = sp.kron(op, left if k < i else (a if k == i else eye), format="csr")
            ops.append(op.astype(complex))
        return ops

    @cached_property
    def creators(self) -> list[sp.csr_matrix]:
        return [a.conj().T.tocsr() for a in self.annihilators]

    def vacuum(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[0] = 1.0
        return v

    def faithful_mask(self) -> np.ndarray:
        """Basis states whose number sector is represented without truncation."""
        if self.is_fermi:
            return np.ones(self.dim, dtype=bool)
        return self.totals <= self.n_max


def history_spec(statistics: str, lat: TimeLattice, n_modes: int = 1, n_max: int = 1) -> FockSpec:
    return FockSpec(statistics, lat.n_sites * n_modes, n_max, lat, n_modes)


def small_spec(statistics: str, n_modes: int, n_max: int = 1) -> FockSpec:
    """Conventional Fock space over ``n_modes`` modes (no time sites)."""
    return FockSpec(statistics, n_modes, n_max, None, n_modes)


@dataclass
class StateVector:
    amplitudes: np.ndarray
    spec: FockSpec
    info: dict = field(default_factory=dict)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def ladder(spec: FockSpec, flat_index: int) -> sp.csr_matrix:
    if not 0 <= flat_index < spec.n_flat:
        raise InvalidArgumentError(f"mode index {flat_index} out of range 0..{spec.n_flat - 1}")
    return spec.annihilators[flat_index]


def creation(spec: FockSpec, wavefunction) -> sp.csr_matrix:
    """``sum_i f_i a_i^dag`` for a single-particle wavefunction ``f``."""
    f = np.asarray(wavefunction, dtype=complex).ravel()
    if f.size != spec.n_flat:
        raise InvalidArgumentError("wavefunction length does not match the number of modes")
    op = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    for fi, c in zip(f, spec.creators):
        if fi != 0:
            op = op + fi * c
    return op


def bilinear(spec: FockSpec, h) -> sp.csr_matrix:
    """Normal-ordered lift ``sum_ij h_ij a_i^dag a_j`` of a single-particle matrix."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (spec.n_flat, spec.n_flat):
        raise InvalidArgumentError("one-body matrix has the wrong shape")
    op = sp.csr_matrix((spec.dim, spec.dim), dtype=complex)
    cre, ann = spec.creators, spec.annihilators
    for i, j in zip(*np.nonzero(np.abs(h) > 0)):
        op = op + h[i, j] * (cre[i] @ ann[j])
    return op.tocsr()


def number_sectors(spec: FockSpec) -> dict[int, np.ndarray]:
    totals = spec.totals
    return {int(n): np.flatnonzero(totals == n) for n in np.unique(totals)}


def _hermitian_check(g: np.ndarray):
    if np.abs(g - g.conj().T).max(initial=0.0) > 1e-10 * max(1.0, np.abs(g).max(initial=0.0)):
        raise InvalidArgumentError("generator must be Hermitian")


def gaussian_unitary(spec: FockSpec, g) -> sp.csr_matrix:
    """``exp(i sum_jk g_jk a_j^dag a_k)`` built sector by sector.

    The exponent conserves total number, so each sector block is Hermitian and
    is exponentiated exactly by dense eigendecomposition.
    """
    g = np.asarray(g, dtype=complex)
    _hermitian_check(g)
    G = bilinear(spec, g)
    return _sector_expm(spec, G, 1j)


def _sector_expm(spec: FockSpec, G: sp.spmatrix, factor: complex) -> sp.csr_matrix:
    """``expm(factor * G)`` for Hermitian number-conserving ``G``, ``factor`` = +-i*s."""
    rows, cols, vals = [], [], []
    G = G.tocsr()
    for idx in number_sectors(spec).values():
        block = G[idx][:, idx].toarray()
        if not block.any():
            rows.append(idx)
            cols.append(idx)
            vals.append(np.ones(len(idx), dtype=complex))
            continue
        w, Q = np.linalg.eigh(0.5 * (block + block.conj().T))
        E = (Q * np.exp(factor * w)) @ Q.conj().T
        r, c = np.meshgrid(idx, idx, indexing="ij")
        keep = np.abs(E) > 1e-300
        rows.append(r[keep])
        cols.append(c[keep])
        vals.append(E[keep])
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(spec.dim, spec.dim))


def gaussian_apply(spec: FockSpec, g, state) -> np.ndarray:
    """``exp(i sum g a^dag a) |state>``, exponentiating only occupied sectors."""
    g = np.asarray(g, dtype=complex)
    _hermitian_check(g)
    G = bilinear(spec, g).tocsr()
    state = np.asarray(state, dtype=complex)
    out = np.zeros_like(state)
    for idx in number_sectors(spec).values():
        part = state[idx]
        if not part.any():
            continue
        block = G[idx][:, idx].toarray()
        w, Q = np.linalg.eigh(0.5 * (block + block.conj().T))
        out[idx] = Q @ (np.exp(1j * w) * (Q.conj().T @ part))
    return out


def hermitian_log(u: np.ndarray) -> np.ndarray:
    """Hermitian ``g`` with ``expm(i g) = u`` for a unitary ``u``."""
    T, Z = _schur(u)
    phases = np.angle(np.diag(T))
    return (Z * phases) @ Z.conj().T


def _schur(u):
    import scipy.linalg as sla

    return sla.schur(np.asarray(u, dtype=complex), output="complex")


def second_quantize(spec: FockSpec, u) -> sp.csr_matrix:
    """Many-body unitary ``Gamma(u)`` with ``Gamma(u) a_i^dag Gamma(u)^dag = sum_j u_ji a_j^dag``."""
    return gaussian_unitary(spec, hermitian_log(u))


def expm_apply(spec: FockSpec, g, state, method: str = "auto") -> np.ndarray:
    """``exp(i sum g a^dag a) |state>`` by dense sector exponentials or Krylov action."""
    if method == "auto":
        method = "dense" if spec.dim <= 2**10 else "krylov"
    if method == "dense":
        return gaussian_unitary(spec, g) @ state
    if method == "krylov":
        G = bilinear(spec, np.asarray(g, dtype=complex))
        return spla.expm_multiply(1j * G.tocsc(), np.asarray(state, dtype=complex))
    raise InvalidArgumentError(f"unknown method {method!r}")


def mode_permutation(spec: FockSpec, perm) -> sp.csr_matrix:
    """``Gamma`` of the permutation ``e_i -> e_perm[i]`` (fermionic signs included)."""
    perm = np.asarray(perm)
    occ = spec.occupations
    new = np.empty_like(occ)
    new[:, perm] = occ
    d = spec.local_dim
    target = np.zeros(spec.dim, dtype=np.int64)
    for i in range(spec.n_flat):
        target = target * d + new[:, i]
    sign = np.ones(spec.dim)
    if spec.is_fermi:
        # parity of inversions among occupied modes after relabelling
        for i in range(spec.n_flat):
            for j in range(i + 1, spec.n_flat):
                if perm[i] > perm[j]:
                    sign *= np.where((occ[:, i] & occ[:, j]) == 1, -1.0, 1.0)
    return sp.csr_matrix((sign.astype(complex), (target, np.arange(spec.dim))),
                         shape=(spec.dim, spec.dim))


def translation(spec: FockSpec, steps: int) -> sp.csr_matrix:
    """Exact ``exp(i P_t dt*steps)``: site ``j`` operators move to site ``j+steps``."""
    N, M = spec.lattice.n_sites, spec.n_modes
    perm = [((j + steps) % N) * M + m for j in range(N) for m in range(M)]
    return mode_permutation(spec, perm)


def coherent_state(spec: FockSpec, alpha) -> StateVector:
    """Normalized product of truncated coherent states ``|alpha_i>`` on each mode.

    ``info`` carries the discarded tail weight of the untruncated state and
    the eigenvalue residual ``max_i |(a_i - alpha_i)|alpha>|``.
    """
    if spec.is_fermi:
        raise UnsupportedError("coherent states need bosonic statistics")
    alpha = np.asarray(alpha, dtype=complex).ravel()
    if alpha.size != spec.n_flat:
        raise InvalidArgumentError("need one amplitude per flat mode")
    n = np.arange(spec.local_dim)
    fact = np.array([np.sqrt(float(factorial(k))) for k in n])
    state = np.ones(1, dtype=complex)
    log_kept = 0.0
    for a in alpha:
        c = np.exp(-0.5 * abs(a) ** 2) * a**n / fact
        # per-mode discarded weight is a Poisson tail; avoids 1 - sum cancellation
        log_kept += np.log1p(-poisson.sf(spec.n_max, abs(a) ** 2))
        state = np.kron(state, c)
    state = state / np.linalg.norm(state)
    res = max((np.linalg.norm(ann @ state - a * state) for a, ann in zip(alpha, spec.annihilators)),
              default=0.0)
    return StateVector(state, spec, {"tail_weight": float(-np.expm1(log_kept)), "eigen_residual": float(res)})


def number_state(spec: FockSpec, occ) -> np.ndarray:
    v = np.zeros(spec.dim, dtype=complex)
    v[spec.index_of(occ)] = 1.0
    return v


def many_body(spec: FockSpec, which: str, theory=None, t0: float | None = None):
    """Many-body ``P_t``, ``J``, ``V``, ``T`` (time operator) or ``N``.

    ``theory`` is the single-particle Hamiltonian (M x M array or a
    number-conserving QuadraticHamiltonian).
    """
    from . import onebody

    lat = spec.lattice
    M = spec.n_modes
    if which == "N":
        return bilinear(spec, np.eye(spec.n_flat))
    if lat is None:
        raise InvalidArgumentError("history operators need a lattice-backed spec")
    if which == "Pt":
        return bilinear(spec, onebody.build_pt_full(lat, M).matrix)
    if which == "T":
        return bilinear(spec, onebody.time_operator(lat, M))
    h = np.zeros((M, M)) if theory is None else _number_conserving(theory)
    if which == "J":
        return bilinear(spec, onebody.build_j(lat, h).matrix)
    if which == "V":
        t0 = lat.t_start if t0 is None else t0
        g = np.kron(np.diag(lat.times - t0), h)
        return gaussian_unitary(spec, g)
    raise InvalidArgumentError(f"unknown operator {which!r}")


def _number_conserving(theory) -> np.ndarray:
    from .quadratic import QuadraticHamiltonian

    if isinstance(theory, QuadraticHamiltonian):
        if not theory.number_conserving():
            raise UnsupportedError("pairing terms are only supported in the BdG channel")
        return theory.at()[0]
    return np.atleast_2d(np.asarray(theory, dtype=complex))


def sector_expm(spec: FockSpec, G, scale: float) -> sp.csr_matrix:
    """``expm(-i scale G)`` for Hermitian number-conserving many-body ``G``."""
    return _sector_expm(spec, sp.csr_matrix(G), -1j * scale)


def _bipartition(spec: FockSpec, state, modes_a) -> np.ndarray:
    """``state`` as a matrix with rows on ``modes_a`` and columns on the rest."""
    modes_a = sorted(int(m) for m in modes_a)
    rest = [m for m in range(spec.n_flat) if m not in modes_a]
    order = modes_a + rest
    psi = np.asarray(state, dtype=complex)
    if order != list(range(spec.n_flat)):
        perm = np.empty(spec.n_flat, dtype=int)
        perm[order] = np.arange(spec.n_flat)
        psi = mode_permutation(spec, perm) @ psi
    d = spec.local_dim
    return psi.reshape(d ** len(modes_a), d ** len(rest))


def reduced_density(spec: FockSpec, state, modes_a) -> np.ndarray:
    """Reduced density matrix of ``state`` on the flat modes ``modes_a``."""
    mat = _bipartition(spec, state, modes_a)
    return mat @ mat.conj().T


def schmidt_coefficients(spec: FockSpec, state, modes_a) -> np.ndarray:
    """Singular values of ``state`` across the ``modes_a`` / rest bipartition."""
    return np.linalg.svd(_bipartition(spec, state, modes_a), compute_uv=False)


def all_occupations(n_modes: int, local_dim: int):
    return list(product(range(local_dim), repeat=n_modes))
