"""Single-particle (and BdG) matrices on the history lattice.

Flat indices are site-major, ``(j, m) -> j*M + m``. The matrix returned by
:func:`build_v` is the single-particle block of the unitary ``V`` for which
``V^dag P_t V = J``; it equals ``blockdiag_j U(t_j, t0)^dag``. Its adjoint
``blockdiag_j U(t_j, t0)`` is the tensor product of conventional evolution
operators that builds histories out of instantaneous states.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgumentError
from .lattice import TimeLattice, dft_matrix, onebody_pt, shift_matrix
from .quadratic import (
    QuadraticHamiltonian,
    build_K,
    commensurability,
    metric,
    normal_form,
    symplectic_inverse,
)
from .result import CheckResult


@dataclass(frozen=True)
class OneBodyOperator:
    matrix: np.ndarray
    lattice: TimeLattice
    n_modes: int = 1
    basis_tag: str = "site"
    hermitian: bool = False

    def __post_init__(self):
        if self.hermitian:
            A = self.matrix
            if np.abs(A - A.conj().T).max() > 1e-10 * max(1.0, np.abs(A).max()):
                raise InvalidArgumentError("matrix flagged Hermitian is not")

    def to_frequency(self) -> "OneBodyOperator":
        if self.basis_tag == "frequency":
            return self
        F = np.kron(dft_matrix(self.lattice), np.eye(self.n_modes))
        return OneBodyOperator(F @ self.matrix @ F.conj().T, self.lattice, self.n_modes,
                               "frequency", self.hermitian)

    def to_site(self) -> "OneBodyOperator":
        if self.basis_tag == "site":
            return self
        F = np.kron(dft_matrix(self.lattice), np.eye(self.n_modes))
        return OneBodyOperator(F.conj().T @ self.matrix @ F, self.lattice, self.n_modes,
                               "site", self.hermitian)


def _hamiltonian_matrix(h) -> np.ndarray:
    if isinstance(h, QuadraticHamiltonian):
        if not h.number_conserving():
            raise InvalidArgumentError("pairing terms have no single-particle matrix")
        return h.at()[0]
    a = np.atleast_2d(np.asarray(h, dtype=complex))
    if a.shape[0] != a.shape[1]:
        raise InvalidArgumentError("h must be square")
    if np.abs(a - a.conj().T).max() > 1e-12 * max(1.0, np.abs(a).max()):
        raise InvalidArgumentError("h must be Hermitian")
    return a


def build_pt_full(lat: TimeLattice, n_modes: int = 1) -> OneBodyOperator:
    return OneBodyOperator(np.kron(onebody_pt(lat), np.eye(n_modes)), lat, n_modes,
                           hermitian=True)


def build_j(lat: TimeLattice, h) -> OneBodyOperator:
    """``j = p (x) 1 - 1 (x) h``; also the single-particle constraint operator."""
    hm = _hamiltonian_matrix(h)
    M = hm.shape[0]
    j = np.kron(onebody_pt(lat), np.eye(M)) - np.kron(np.eye(lat.n_sites), hm)
    return OneBodyOperator(j, lat, M, hermitian=True)


def evolution_operator(h, t: float, t0: float, n_substeps: int = 64, dt: float | None = None):
    """``U(t, t0)`` for a constant matrix or a callable ``h(t)``.

    Callables are time ordered with midpoint substeps, ``n_substeps`` per
    interval of length ``dt`` (per unit time when ``dt`` is None).
    """
    if not callable(h):
        return sla.expm(-1j * (t - t0) * _hamiltonian_matrix(h))
    if t < t0:
        return evolution_operator(h, t0, t, n_substeps, dt).conj().T
    span = t - t0
    unit = 1.0 if dt is None else dt
    n = max(1, int(np.ceil(n_substeps * span / unit - 1e-9)))
    step = span / n
    U = np.eye(np.atleast_2d(h(t0)).shape[0], dtype=complex)
    for i in range(n):
        tm = t0 + (i + 0.5) * step
        U = sla.expm(-1j * step * np.atleast_2d(np.asarray(h(tm), dtype=complex))) @ U
    return U


def build_v(lat: TimeLattice, h, t0: float | None = None, n_substeps: int = 64) -> OneBodyOperator:
    """Single-particle block of ``V``: ``blockdiag_j U(t_j, t0)^dag``."""
    t0 = lat.t_start if t0 is None else t0
    blocks = [evolution_operator(h, t, t0, n_substeps, lat.dt).conj().T for t in lat.times]
    M = blocks[0].shape[0]
    return OneBodyOperator(sla.block_diag(*blocks), lat, M)


def _is_commensurate(lat, h) -> bool:
    if callable(h):
        return False
    ok, _ = commensurability(QuadraticHamiltonian(_hamiltonian_matrix(h)), lat)
    return ok


def _mod_distance(a: np.ndarray, b: np.ndarray, period: float) -> float:
    """Largest gap between two multisets of reals compared modulo ``period``."""
    a = np.sort(np.mod(a, period))
    b = np.sort(np.mod(b, period))
    best = np.inf
    # cyclic alignment handles values straddling the wrap point
    for shift in range(len(b)):
        d = np.abs(a - np.roll(b, shift))
        d = np.minimum(d, period - d)
        best = min(best, d.max())
    return float(best)


def verify_diag(lat: TimeLattice, h, t0: float | None = None, form: str = "exponentiated",
                tol: float = 1e-10) -> CheckResult:
    """Check ``v^dag exp(-i p dt) v = exp(-i j dt)`` or its generator form.

    The generator form reports ``|v^dag p v - j|`` (not expected to vanish on a
    lattice) and certifies the spectra modulo ``2 pi / dt`` instead.
    """
    hm = _hamiltonian_matrix(h)
    M = hm.shape[0]
    v = build_v(lat, hm, t0).matrix
    j = build_j(lat, hm).matrix
    commensurate = _is_commensurate(lat, hm)
    meta = {"n_sites": lat.n_sites, "n_modes": M, "form": form, "commensurate": commensurate}
    if form == "exponentiated":
        shift = np.kron(shift_matrix(lat), np.eye(M))
        lhs = v.conj().T @ shift @ v
        rhs = sla.expm(-1j * lat.dt * j)
        r = float(np.abs(lhs - rhs).max())
        return CheckResult("diag/exponentiated", {"residual": r}, {"residual": tol},
                           expected_nonzero=not commensurate, metadata=meta)
    if form == "generator":
        p = np.kron(onebody_pt(lat), np.eye(M))
        conj = v.conj().T @ p @ v
        raw = float(np.abs(conj - j).max())
        ev_conj = np.linalg.eigvalsh(0.5 * (conj + conj.conj().T))
        ev_j = np.linalg.eigvalsh(j)
        spec = _mod_distance(ev_conj, ev_j, 2 * np.pi / lat.dt)
        meta["generator_residual"] = raw
        return CheckResult("diag/generator", {"spectral_residual": spec},
                           {"spectral_residual": tol}, expected_nonzero=not commensurate,
                           metadata=meta)
    raise InvalidArgumentError(f"unknown form {form!r}")


def frequency_mode(lat: TimeLattice, h, k: int, weights=None, t0: float | None = None) -> np.ndarray:
    """Wavefunctions of ``V^dag A_m^dag(omega_k) V`` as columns, shape (N*M, M).

    ``weights`` (length M) combines the columns into a single vector instead.
    """
    hm = h if callable(h) else _hamiltonian_matrix(h)
    M = np.atleast_2d(hm(lat.t_start) if callable(hm) else hm).shape[0]
    F = dft_matrix(lat)
    row = int(np.flatnonzero(lat.k_window == k)[0])
    cols = np.kron(F[row].conj()[:, None], np.eye(M))
    vdag = build_v(lat, hm, t0).matrix.conj().T
    modes = vdag @ cols
    if weights is not None:
        return modes @ np.asarray(weights, dtype=complex)
    return modes


def physical_modes(lat: TimeLattice, h, tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (columns) of ``ker j``.

    Each kernel vector is a frequency-basis pair ``(k, m)`` with
    ``omega_k = eigenvalue_m(h)``, mapped back to sites; for a single
    oscillator it has amplitudes ``exp(-i omega0 (t_j - t_start)) / sqrt N``
    up to a global phase.
    """
    hm = _hamiltonian_matrix(h)
    M = hm.shape[0]
    evals, evecs = np.linalg.eigh(hm)
    F = dft_matrix(lat)
    cols = []
    for m in range(M):
        for row, w in enumerate(lat.omegas):
            if abs(w - evals[m]) <= tol * max(1.0, abs(w)):
                # conj(F[row]) is the site wavefunction of A^dag(omega_k)
                site = F[row].conj() * np.exp(1j * w * lat.t_start)
                cols.append(np.kron(site, evecs[:, m]))
    if not cols:
        return np.zeros((lat.n_sites * M, 0), dtype=complex)
    return np.array(cols).T


# --- doubled (BdG) channel -------------------------------------------------


def physical_bdg_modes(lat: TimeLattice, H: QuadraticHamiltonian, t0: float | None = None):
    """Coefficient matrix ``C`` with ``Psi~(0) = C Psi_all``.

    ``Psi_all`` stacks the doubled site vectors ``(A_j, A_j^dag)`` site-major;
    ``C_j = W(t_j)^-1 / sqrt N`` with ``W(t) = expm(-i Pi K (t - t0)) W0`` and
    ``W0`` the normal-form map. Returns ``(C, W0, K_normal)``.
    """
    t0 = lat.t_start if t0 is None else t0
    W0, nu = normal_form(H)
    K = build_K(H)
    M = K.shape[0] // 2
    P = metric(M)
    blocks = []
    for t in lat.times:
        W = sla.expm(-1j * P @ K * (t - t0)) @ W0
        blocks.append(symplectic_inverse(W) / np.sqrt(lat.n_sites))
    C = np.hstack(blocks)
    Kn = W0.conj().T @ K @ W0
    return C, W0, Kn


def translate_physical(lat: TimeLattice, H: QuadraticHamiltonian, delta_t: float,
                       t0: float | None = None, tol: float = 1e-9) -> CheckResult:
    """Rigid site translation of the physical doubled operators.

    Compares ``exp(i P dt_) Psi~(0) exp(-i P dt_)`` (site relabelling of the
    coefficient blocks) with ``expm(-i Pi K' dt_) Psi~(0)``, ``K'`` the
    normal-form matrix.
    """
    d = lat.steps(delta_t)
    C, W0, Kn = physical_bdg_modes(lat, H, t0)
    M = Kn.shape[0] // 2
    N = lat.n_sites
    blocks = C.reshape(2 * M, N, 2 * M)
    # translated coefficient at site j is the old coefficient at site j - d
    moved = np.roll(blocks, d, axis=1).reshape(2 * M, N * 2 * M)
    E = sla.expm(-1j * metric(M) @ Kn * delta_t)
    r = float(np.abs(moved - E @ C).max())
    ok, bad = commensurability(H, lat)
    meta = {"n_sites": N, "n_modes": M, "steps": d, "commensurate": ok, "offending": bad,
            "phases": np.diag(E).tolist()}
    return CheckResult("translate/physical", {"residual": r}, {"residual": tol},
                       expected_nonzero=not ok, metadata=meta)


def bdg_shift(lat: TimeLattice, n_modes: int, steps: int = 1) -> np.ndarray:
    """Doubled-channel ``exp(-i P dt*steps)``: both A and A^dag move with the sites."""
    return np.kron(shift_matrix(lat, steps), np.eye(2 * n_modes))


# --- time operator ---------------------------------------------------------


def time_operator(lat: TimeLattice, n_modes: int = 1) -> np.ndarray:
    return np.kron(np.diag(lat.times), np.eye(n_modes))


def gaussian_packet(lat: TimeLattice, sigma: float, center: float = 0.0, carrier: float = 0.0,
                    mode=None) -> np.ndarray:
    """Normalized ``exp(-(t-c)^2 / (2 sigma^2) - i carrier t)`` on the sites."""
    t = lat.times
    f = np.exp(-((t - center) ** 2) / (2 * sigma**2) - 1j * carrier * t)
    f = f / np.linalg.norm(f)
    if mode is not None:
        f = np.kron(f, np.asarray(mode, dtype=complex))
    return f


def commutator_pt_time(lat: TimeLattice, bra, ket, n_modes: int = 1) -> complex:
    """``<bra| [p, tau] - i |ket>`` with ``tau = diag(t_j) (x) 1``."""
    p = np.kron(onebody_pt(lat), np.eye(n_modes))
    tau = time_operator(lat, n_modes)
    C = p @ tau - tau @ p - 1j * np.eye(p.shape[0])
    return complex(np.vdot(np.asarray(bra), C @ np.asarray(ket)))


# --- canonical symmetries --------------------------------------------------


def _generator(g, t) -> np.ndarray:
    return np.atleast_2d(np.asarray(g(t) if callable(g) else g, dtype=complex))


def conjugation_symmetry(lat: TimeLattice, g: Callable | np.ndarray, scheme: str = "central",
                         probes: np.ndarray | None = None, tol: float = 1e-10) -> CheckResult:
    """Residual of ``u p u^dag - p + i (du/dt) u^dag`` with ``u = blockdiag exp(i g(t_j))``.

    ``du/dt`` is a finite difference of ``exp(i g(t))`` with step ``dt``
    (``central`` or ``forward``). The residual is measured on smooth probe
    vectors (default: a centred Gaussian packet of width T/16 in every mode),
    since the lattice derivative is only accurate below the Nyquist band.
    For constant ``g`` the exact statement ``[u, p] = 0`` is also reported.
    """
    M = _generator(g, lat.times[0]).shape[0]
    p = np.kron(onebody_pt(lat), np.eye(M))
    eps = lat.dt
    expg = lambda t: sla.expm(1j * _generator(g, t))
    u = sla.block_diag(*[expg(t) for t in lat.times])
    if scheme == "central":
        du = sla.block_diag(*[(expg(t + eps) - expg(t - eps)) / (2 * eps) for t in lat.times])
    elif scheme == "forward":
        du = sla.block_diag(*[(expg(t + eps) - expg(t)) / eps for t in lat.times])
    else:
        raise InvalidArgumentError(f"unknown difference scheme {scheme!r}")
    R = u @ p @ u.conj().T - p + 1j * du @ u.conj().T
    if probes is None:
        packet = gaussian_packet(lat, lat.period / 16)
        probes = np.kron(packet[:, None], np.eye(M))
    probes = np.atleast_2d(np.asarray(probes, dtype=complex))
    if probes.shape[0] != p.shape[0]:
        probes = probes.T
    conj_res = float(np.linalg.norm(R @ probes, axis=0).max())
    residuals = {"conjugation": conj_res}
    tolerances = {}
    constant = not callable(g)
    if constant:
        residuals["commutator"] = float(np.abs(u @ p - p @ u).max())
        tolerances = {"commutator": tol, "conjugation": tol}
    meta = {"n_sites": lat.n_sites, "dt": eps, "scheme": scheme, "time_dependent": not constant}
    return CheckResult("symmetry/conjugation", residuals, tolerances, metadata=meta)


def convergence_order(values, steps) -> float:
    """Least-squares slope of log(value) against log(step)."""
    x = np.log(np.asarray(steps, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])
