"""Physical subspaces, the lift map, foliation and propagators.

All theories here are number conserving and normal ordered, so the transformed
vacuum coincides with the bare history vacuum and ``V`` acts as a
second-quantized single-particle unitary. Conventional (single-time) states
live in a ``small`` Fock space over the M spatial modes with the same
statistics and per-mode cutoff as the history space.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import factorial
from typing import Callable

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import fock
from .errors import DegenerateDenominatorError, InvalidArgumentError
from .fock import FockSpec, StateVector
from .lattice import TimeLattice, dft_matrix
from .onebody import _hamiltonian_matrix, build_v, frequency_mode
from .result import CheckResult


@dataclass
class LiftResult:
    state: StateVector
    source: np.ndarray
    theory: np.ndarray
    constants: dict = field(default_factory=dict)

    @property
    def amplitudes(self) -> np.ndarray:
        return self.state.amplitudes


def small_space(spec: FockSpec) -> FockSpec:
    return fock.small_spec(spec.statistics, spec.n_modes, spec.n_max)


def _theory(theory):
    if callable(theory):
        return theory
    return _hamiltonian_matrix(theory)


def polynomial_state(spec: FockSpec, columns: np.ndarray, psi) -> np.ndarray:
    """Apply ``psi`` written in creation operators of ``columns`` to the vacuum.

    ``columns[:, m]`` is the wavefunction of the m-th creation operator. Small
    basis state ``n`` maps to ``prod_m (c_m^dag)^{n_m} / sqrt(n_m!) |0>`` with
    ``m = 0`` leftmost.
    """
    small = small_space(spec)
    psi = np.asarray(psi, dtype=complex).ravel()
    if psi.size != small.dim:
        raise InvalidArgumentError(f"small-space state must have length {small.dim}")
    cre = [fock.creation(spec, columns[:, m]) for m in range(columns.shape[1])]
    out = np.zeros(spec.dim, dtype=complex)
    for idx in np.flatnonzero(psi):
        occ = small.occupations[idx]
        vec = spec.vacuum()
        for m in range(len(cre) - 1, -1, -1):
            for _ in range(occ[m]):
                vec = cre[m] @ vec
            vec = vec / np.sqrt(float(factorial(int(occ[m]))))
        out += psi[idx] * vec
    return out


def physical_columns(lat: TimeLattice, theory, smear=None, t0: float | None = None) -> np.ndarray:
    """Wavefunctions of the (optionally smeared) physical creation operators."""
    h = _theory(theory)
    if smear is None:
        return frequency_mode(lat, h, 0, t0=t0)
    phi = np.asarray(smear, dtype=complex).ravel()
    if phi.size != lat.n_sites:
        raise InvalidArgumentError("need one smearing weight per lattice frequency")
    if abs(np.sum(np.abs(phi) ** 2) - 1.0) > 1e-10:
        raise InvalidArgumentError("smearing weights must be normalized")
    # A'^dag = sum_k conj(phi_k) A~^dag(omega_k)
    return sum(np.conj(c) * frequency_mode(lat, h, int(k), t0=t0)
               for c, k in zip(phi, lat.k_window))


def lift(spec: FockSpec, lat: TimeLattice, theory, psi, smear=None,
         t0: float | None = None) -> LiftResult:
    """History of the conventional state ``psi`` in the physical subspace."""
    if spec.lattice is None or spec.lattice.n_sites != lat.n_sites:
        raise InvalidArgumentError("spec must be built on the same lattice")
    cols = physical_columns(lat, theory, smear, t0)
    amp = polynomial_state(spec, cols, psi)
    h = _theory(theory)
    constants = {}
    if not callable(h):
        constants["theory_constant"] = float(getattr(theory, "constant", 0.0))
    state = StateVector(amp, spec, {"smeared": smear is not None})
    return LiftResult(state, np.asarray(psi, dtype=complex).ravel(), h, constants)


def physical_annihilators(spec: FockSpec, lat: TimeLattice, theory, t0=None) -> list:
    cols = physical_columns(lat, theory, None, t0)
    return [fock.creation(spec, cols[:, m]).conj().T.tocsr() for m in range(cols.shape[1])]


def action_residual(spec: FockSpec, theory, state) -> float:
    """``|J |state>|`` with the many-body quantum action."""
    J = fock.many_body(spec, "J", _theory(theory))
    return float(np.linalg.norm(J @ _amp(state)))


def _amp(state) -> np.ndarray:
    if isinstance(state, (StateVector, LiftResult)):
        return state.amplitudes
    return np.asarray(state, dtype=complex)


# --- foliation ---------------------------------------------------------------


def foliation_onebody(lat: TimeLattice, theory, t: float, t0: float | None = None) -> np.ndarray:
    """Single-particle block of F(t): maps A~(omega_k) to the site at ``t + k dt``."""
    h = _theory(theory)
    v = build_v(lat, h, t0).matrix
    M = v.shape[0] // lat.n_sites
    F = dft_matrix(lat)
    s0 = lat.site_index(t)
    f0 = np.zeros((lat.n_sites, lat.n_sites), dtype=complex)
    for row, k in enumerate(lat.k_window):
        f0[:, (s0 + k) % lat.n_sites] = F[row].conj()
    return v.conj().T @ np.kron(f0, np.eye(M)) @ v


def foliation_unitary(spec: FockSpec, lat: TimeLattice, theory, t: float,
                      t0: float | None = None) -> sp.csr_matrix:
    return fock.second_quantize(spec, foliation_onebody(lat, theory, t, t0))


def foliation_apply(spec: FockSpec, lat: TimeLattice, theory, t: float, state,
                    t0: float | None = None, adjoint: bool = False) -> np.ndarray:
    """``F(t)|state>`` (or ``F(t)^dag|state>``) without forming the full operator."""
    g = fock.hermitian_log(foliation_onebody(lat, theory, t, t0))
    return fock.gaussian_apply(spec, -g if adjoint else g, _amp(state))


def evolve_small(small: FockSpec, theory, t: float, t0: float) -> np.ndarray:
    """Conventional ``U(t, t0)`` on the small Fock space."""
    h = _theory(theory)
    if callable(h):
        raise InvalidArgumentError("small-space evolution needs a constant Hamiltonian")
    H = fock.bilinear(small, h).toarray()
    return sla.expm(-1j * (t - t0) * H)


def site_state(spec: FockSpec, lat: TimeLattice, psi_small, t: float) -> np.ndarray:
    """History state carrying ``psi_small`` at site ``t`` and vacuum elsewhere."""
    M = spec.n_modes
    j = lat.site_index(t)
    cols = np.zeros((spec.n_flat, M), dtype=complex)
    for m in range(M):
        cols[j * M + m, m] = 1.0
    return polynomial_state(spec, cols, psi_small)


# --- propagators -------------------------------------------------------------


def propagator_ratio(spec: FockSpec, lat: TimeLattice, theory, Psi, Phi, t1: float, t2: float,
                     method: str = "foliation", t0: float | None = None,
                     denominator_tol: float = 1e-12) -> complex:
    """Overlap ratio reproducing ``<phi| exp(iH(t2 - t1)) |psi> / <0|...|0>``."""
    d = lat.steps(t2 - t1)
    shift = fock.translation(spec, d)
    Psi, Phi = _amp(Psi), _amp(Phi)
    vac = spec.vacuum()
    if method == "foliation":
        a = foliation_apply(spec, lat, theory, t1, Psi, t0, adjoint=True)
        b = foliation_apply(spec, lat, theory, t2, Phi, t0, adjoint=True)
        num = np.vdot(b, shift @ a)
    elif method == "global":
        num = np.vdot(Phi, shift @ Psi)
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    den = np.vdot(vac, shift @ vac)
    if abs(den) < denominator_tol:
        raise DegenerateDenominatorError("vacuum overlap vanishes")
    return complex(num / den)


def reference_propagator(small: FockSpec, theory, psi, phi, delta_t: float) -> complex:
    U = evolve_small(small, theory, -delta_t, 0.0)  # exp(+i H delta_t)
    psi = np.asarray(psi, dtype=complex).ravel()
    phi = np.asarray(phi, dtype=complex).ravel()
    vac = small.vacuum()
    den = np.vdot(vac, U @ vac)
    if abs(den) < 1e-12:
        raise DegenerateDenominatorError("vacuum overlap vanishes")
    return complex(np.vdot(phi, U @ psi) / den)


# --- observables -------------------------------------------------------------


Observable = Callable[[list, list], sp.spmatrix]


def observable_element(spec: FockSpec, lat: TimeLattice, theory, observable: Observable,
                       t: float, Psi, Phi, t0: float | None = None) -> complex:
    """``<Phi| exp(i P t) O exp(-i P t) |Psi>`` with ``O = observable(a~, a~^dag)``."""
    d = lat.steps(t)
    ann = physical_annihilators(spec, lat, theory, t0)
    cre = [a.conj().T.tocsr() for a in ann]
    O = observable(ann, cre)
    back = fock.translation(spec, -d)
    return complex(np.vdot(back @ _amp(Phi), O @ (back @ _amp(Psi))))


def conventional_element(small: FockSpec, theory, observable: Observable, t: float, psi, phi) -> complex:
    """``<phi| exp(iHt) O exp(-iHt) |psi>`` with ``O = observable(a, a^dag)``."""
    U = evolve_small(small, theory, t, 0.0)
    O = observable(small.annihilators, small.creators)
    O = O.toarray() if sp.issparse(O) else np.asarray(O)
    psi = np.asarray(psi, dtype=complex).ravel()
    phi = np.asarray(phi, dtype=complex).ravel()
    return complex(np.vdot(U @ phi, O @ (U @ psi)))


def quadrature(ann, cre, mode: int = 0):
    """Position-like quadrature ``(a + a^dag)/sqrt 2`` of one mode."""
    return (ann[mode] + cre[mode]) / np.sqrt(2.0)


def number_operator(ann, cre):
    return sum(c @ a for a, c in zip(ann, cre))


# --- temporal structure ------------------------------------------------------


def temporal_entropy(spec: FockSpec, state, sites) -> float:
    """Von Neumann entropy (nats) between the given time sites and the rest."""
    M = spec.n_modes
    modes = [j * M + m for j in sites for m in range(M)]
    psi = _amp(state)
    nrm = np.linalg.norm(psi)
    if nrm == 0:
        raise InvalidArgumentError("zero state has no entropy")
    w = fock.schmidt_coefficients(spec, psi / nrm, modes) ** 2
    w = w[w > 1e-300]
    return float(max(0.0, -np.sum(w * np.log(w))))


def sp_structure_checks(lat: TimeLattice, frequencies, psi=None, phi=None, k_pair=(0, 1),
                        t0: float | None = None, tol: float = 1e-12,
                        rng: np.random.Generator | None = None) -> list[CheckResult]:
    """Single-particle structure of decoupled oscillators.

    (a) the lifted single-particle state, built in the fermionic history Fock
    space, equals ``sum_jm psi_m exp(-i w_m (t_j - t0)) |t_j m> / sqrt N``;
    (b) families built on two lattice frequencies are Kronecker orthonormal.
    """
    freqs = np.atleast_1d(np.asarray(frequencies, dtype=float))
    M = freqs.size
    h = np.diag(freqs).astype(complex)
    t0 = lat.t_start if t0 is None else t0
    rng = np.random.default_rng(0) if rng is None else rng
    if psi is None:
        psi = rng.normal(size=M) + 1j * rng.normal(size=M)
    if phi is None:
        phi = rng.normal(size=M) + 1j * rng.normal(size=M)
    psi = np.asarray(psi, dtype=complex)
    phi = np.asarray(phi, dtype=complex)

    spec = fock.history_spec("fermi", lat, M)
    small = small_space(spec)
    psi_small = np.zeros(small.dim, dtype=complex)
    for m in range(M):
        occ = [0] * M
        occ[m] = 1
        psi_small[small.index_of(occ)] = psi[m]
    lifted = lift(spec, lat, h, psi_small, t0=t0).amplitudes
    sp_amp = np.array([lifted[spec.index_of([1 if i == f else 0 for i in range(spec.n_flat)])]
                       for f in range(spec.n_flat)])
    expected = (np.exp(-1j * np.outer(lat.times - t0, freqs)) * psi).ravel() / np.sqrt(lat.n_sites)
    ra = float(np.abs(sp_amp - expected).max())
    outside = float(np.linalg.norm(lifted) ** 2 - np.linalg.norm(sp_amp) ** 2)

    k1, k2 = k_pair
    fam = {k: frequency_mode(lat, h, k, t0=t0) for k in (k1, k2)}
    gram = []
    for ka in (k1, k2):
        for kb in (k1, k2):
            ov = np.vdot(fam[kb] @ phi, fam[ka] @ psi)
            target = np.vdot(phi, psi) if ka == kb else 0.0
            gram.append(abs(ov - target))
    rb = float(max(gram))
    meta = {"n_sites": lat.n_sites, "n_modes": M, "k_pair": list(k_pair)}
    return [
        CheckResult("paw/componentwise", {"residual": ra, "outside_sp": abs(outside)},
                    {"residual": tol, "outside_sp": tol}, metadata=meta),
        CheckResult("paw/orthogonality", {"residual": rb}, {"residual": tol}, metadata=meta),
    ]
