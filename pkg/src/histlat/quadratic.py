"""Quadratic Hamiltonians in the doubled (BdG) representation.

A quadratic Hamiltonian on M bosonic modes is

    H = a^dag omega0 a + (a^dag gamma a^dag + a gamma^* a)/2 + c
      = psi^dag K psi / 2,        psi = (a, a^dag),

with ``omega0`` Hermitian, ``gamma`` symmetric and
``K = [[omega0, gamma], [gamma^*, omega0^*]]``. Canonical commutators are
preserved by maps ``W`` with ``W^dag Pi W = Pi``, ``Pi = diag(1_M, -1_M)``.
The Heisenberg equation for the doubled operator vector reads
``i dW/dt = Pi K W``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg as sla

from .errors import InvalidArgumentError, UnstableTheoryError
from .lattice import TimeLattice

MatrixLike = Union[np.ndarray, Callable[[float], np.ndarray]]

HERMITIAN_TOL = 1e-12


def metric(n_modes: int) -> np.ndarray:
    return np.diag(np.concatenate([np.ones(n_modes), -np.ones(n_modes)]))


def _as_matrix(x, n=None) -> np.ndarray:
    a = np.atleast_2d(np.asarray(x, dtype=complex))
    if a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"expected a square matrix, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise InvalidArgumentError(f"expected {n}x{n} matrix, got {a.shape}")
    return a


def _check_blocks(omega0: np.ndarray, gamma: np.ndarray) -> None:
    scale = max(1.0, np.abs(omega0).max(initial=0.0), np.abs(gamma).max(initial=0.0))
    if np.abs(omega0 - omega0.conj().T).max(initial=0.0) > HERMITIAN_TOL * scale:
        raise InvalidArgumentError("omega0 must be Hermitian")
    if np.abs(gamma - gamma.T).max(initial=0.0) > HERMITIAN_TOL * scale:
        raise InvalidArgumentError("gamma must be symmetric")


@dataclass(frozen=True)
class QuadraticHamiltonian:
    """(omega0, gamma) pair, either constant arrays or callables of time.

    ``constant`` is the c-number left over after normal ordering; it never
    enters operators but is carried along so identities can be checked with
    and without it.
    """

    omega0: MatrixLike
    gamma: MatrixLike | None = None
    constant: float = 0.0

    def __post_init__(self):
        if not callable(self.omega0):
            w = _as_matrix(self.omega0)
            object.__setattr__(self, "omega0", w)
            if self.gamma is None:
                object.__setattr__(self, "gamma", np.zeros_like(w))
            elif not callable(self.gamma):
                object.__setattr__(self, "gamma", _as_matrix(self.gamma, w.shape[0]))
            if not callable(self.gamma):
                _check_blocks(self.omega0, self.gamma)

    @property
    def is_constant(self) -> bool:
        return not callable(self.omega0) and not callable(self.gamma)

    def at(self, t: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        if not self.is_constant and t is None:
            raise InvalidArgumentError("time-dependent Hamiltonian needs a time argument")
        w = _as_matrix(self.omega0(t)) if callable(self.omega0) else self.omega0
        if self.gamma is None:
            g = np.zeros_like(w)
        else:
            g = _as_matrix(self.gamma(t), w.shape[0]) if callable(self.gamma) else self.gamma
        _check_blocks(w, g)
        return w, g

    @property
    def n_modes(self) -> int:
        return self.at(0.0)[0].shape[0]

    def number_conserving(self, t: float | None = 0.0) -> bool:
        return not np.any(self.at(t)[1])


def oscillator(omega0, gamma=0.0) -> QuadraticHamiltonian:
    """Single-mode theory ``omega0 a^dag a + gamma (a^dag^2 + a^2)/2`` (real gamma)."""
    return QuadraticHamiltonian(np.array([[omega0]]), np.array([[gamma]]))


def build_K(H: QuadraticHamiltonian, t: float | None = None) -> np.ndarray:
    w, g = H.at(t)
    K = np.block([[w, g], [g.conj(), w.conj()]])
    if np.abs(K - K.conj().T).max() > HERMITIAN_TOL * max(1.0, np.abs(K).max()):
        raise InvalidArgumentError("K is not Hermitian")
    return K


def from_tvu(t_mat, v_mat, u_mat) -> tuple[QuadraticHamiltonian, float]:
    """Convert the (q, p) form to (omega0, gamma) and a normal-ordering constant.

    The input is ``H = 1/2 sum_ij t_ij p_i p_j + v_ij q_i q_j + u_ij (q_i p_j + p_j q_i)``
    with ``q = (a + a^dag)/sqrt 2``, ``p = i (a^dag - a)/sqrt 2``. Substituting
    and normal ordering gives

        omega0 = (t + v)/2 + i (u^T - u)/2
        gamma  = (v - t)/2 + i (u + u^T)/2
        H      = :psi^dag K psi: / 2 + tr(t + v)/4
    """
    t = np.atleast_2d(np.asarray(t_mat, dtype=float))
    v = np.atleast_2d(np.asarray(v_mat, dtype=float))
    u = np.atleast_2d(np.asarray(u_mat, dtype=float))
    if not (t.shape == v.shape == u.shape) or t.shape[0] != t.shape[1]:
        raise InvalidArgumentError("t, v, u must be square matrices of equal size")
    for name, m in (("t", t), ("v", v)):
        if np.abs(m - m.T).max(initial=0.0) > 1e-12 * max(1.0, np.abs(m).max(initial=0.0)):
            raise InvalidArgumentError(f"{name} matrix must be symmetric")
    omega0 = 0.5 * (t + v) + 0.5j * (u.T - u)
    gamma = 0.5 * (v - t) + 0.5j * (u + u.T)
    constant = 0.25 * float(np.trace(t + v))
    return QuadraticHamiltonian(omega0, gamma, constant=constant), constant


def symplectic_residual(W: np.ndarray) -> float:
    n = W.shape[0] // 2
    P = metric(n)
    return float(np.abs(W.conj().T @ P @ W - P).max())


def symplectic_inverse(W: np.ndarray) -> np.ndarray:
    P = metric(W.shape[0] // 2)
    return P @ W.conj().T @ P


@dataclass
class WPropagation:
    times: np.ndarray
    maps: list[np.ndarray]
    symplectic_residual: float
    heisenberg_residual: float


def propagate_W(H: QuadraticHamiltonian, lat: TimeLattice, W0=None) -> WPropagation:
    """Solve ``i dW/dt = Pi K(t) W`` on the lattice sites starting at ``t_start``.

    Constant theories use the closed form ``expm(-i Pi K (t_j - t_start)) W0``;
    sampled theories multiply one-step exponentials ``expm(-i Pi K(t_j) dt)``.
    The reported Heisenberg residual is the forward finite difference
    ``max_j |i (W_{j+1} - W_j)/dt - Pi K(t_j) W_j|``, which is O(dt).
    """
    M = H.n_modes
    P = metric(M)
    W0 = np.eye(2 * M, dtype=complex) if W0 is None else np.asarray(W0, dtype=complex)
    if symplectic_residual(W0) > 1e-9:
        raise InvalidArgumentError("initial map W0 is not symplectic")
    times = lat.times
    maps: list[np.ndarray] = []
    if H.is_constant:
        G = P @ build_K(H)
        for t in times:
            maps.append(sla.expm(-1j * G * (t - lat.t_start)) @ W0)
    else:
        W = W0.copy()
        for t in times:
            maps.append(W)
            W = sla.expm(-1j * P @ build_K(H, t) * lat.dt) @ W
    heis = 0.0
    for j in range(len(times) - 1):
        G = P @ build_K(H, None if H.is_constant else times[j])
        r = 1j * (maps[j + 1] - maps[j]) / lat.dt - G @ maps[j]
        heis = max(heis, float(np.abs(r).max()))
    sym = max(symplectic_residual(W) for W in maps)
    return WPropagation(times, maps, sym, heis)


def _phase_fix(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v) > np.abs(v).max() * (1 - 1e-9)))
    return v * np.exp(-1j * np.angle(v[k]))


def normal_form(H: QuadraticHamiltonian, tol: float = 1e-9) -> tuple[np.ndarray, np.ndarray]:
    """Symplectic ``W0`` with ``W0^dag K W0 = diag(nu, nu)`` and ascending ``nu``.

    Eigenvectors of ``Pi K`` with positive symplectic norm become the first M
    columns; their partners ``(v^*, u^*)`` fill the last M. Degenerate
    eigenspaces are orthonormalized in the Pi metric, and each column's
    largest component (first in index order on ties) is made real positive.
    """
    if not H.is_constant:
        raise InvalidArgumentError("normal_form needs a time-independent Hamiltonian")
    K = build_K(H)
    M = K.shape[0] // 2
    P = metric(M)
    lam, vecs = np.linalg.eig(P @ K)
    scale = max(1.0, np.abs(lam).max(initial=0.0))
    if np.any(np.abs(lam.imag) > tol * scale):
        raise UnstableTheoryError("Pi K has complex eigenvalues", lam)
    lam = lam.real
    order = np.argsort(lam, kind="stable")
    lam, vecs = lam[order], vecs[:, order]

    cols, freqs = [], []
    i = 0
    while i < len(lam):
        j = i
        while j + 1 < len(lam) and abs(lam[j + 1] - lam[i]) <= 1e-7 * scale:
            j += 1
        block = vecs[:, i:j + 1]
        q, r = np.linalg.qr(block)
        if np.abs(np.diag(r)).min() < 1e-8 * np.abs(np.diag(r)).max():
            raise UnstableTheoryError("Pi K is not diagonalizable", lam)
        G = q.conj().T @ P @ q
        g, Q = np.linalg.eigh(0.5 * (G + G.conj().T))
        if np.abs(g).min() < 1e-10:
            raise UnstableTheoryError("zero symplectic norm eigenvector", lam)
        for gk, qk in zip(g, Q.T):
            if gk > 0:
                cols.append(q @ qk / np.sqrt(gk))
                freqs.append(float(np.mean(lam[i:j + 1])))
        i = j + 1
    if len(cols) != M:
        raise UnstableTheoryError("wrong number of positive-norm normal modes", lam)
    order = np.argsort(freqs, kind="stable")
    nu = np.array(freqs)[order]
    top = np.array([_phase_fix(cols[k]) for k in order]).T
    partner = np.vstack([top[M:].conj(), top[:M].conj()])
    W0 = np.hstack([top, partner])
    return W0, nu


def commensurability(H: QuadraticHamiltonian, lat: TimeLattice, tol: float = 1e-9):
    """Whether all evolution frequencies lie on ``(2 pi / T) Z``.

    Returns ``(ok, offending)``. Number-conserving theories are tested on the
    eigenvalues of ``omega0``; theories with pairing on their normal frequencies.
    """
    if H.number_conserving():
        freqs = np.linalg.eigvalsh(H.at()[0])
    else:
        _, freqs = normal_form(H)
    base = 2 * np.pi / lat.period
    x = freqs / base
    bad = [float(f) for f, xi in zip(freqs, x) if abs(xi - np.round(xi)) > tol * max(1.0, abs(xi))]
    return not bad, bad


def random_bogoliubov(rng: np.random.Generator, n_modes: int, scale: float = 0.5) -> np.ndarray:
    """Random symplectic map of Bogoliubov block form."""
    a = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
    b = rng.normal(size=(n_modes, n_modes)) + 1j * rng.normal(size=(n_modes, n_modes))
    w = 0.5 * (a + a.conj().T)
    g = 0.5 * (b + b.T)
    K = np.block([[w, g], [g.conj(), w.conj()]]) * scale
    return sla.expm(-1j * metric(n_modes) @ K)


def theory_from_normal_form(W0: np.ndarray, nu) -> QuadraticHamiltonian:
    """Quadratic theory whose normal form is ``(W0, nu)``: ``K = W0^-dag diag(nu,nu) W0^-1``."""
    nu = np.asarray(nu, dtype=float)
    Winv = symplectic_inverse(W0)
    K = Winv.conj().T @ np.diag(np.concatenate([nu, nu])) @ Winv
    K = 0.5 * (K + K.conj().T)
    M = len(nu)
    return QuadraticHamiltonian(K[:M, :M], 0.5 * (K[:M, M:] + K[:M, M:].T))
