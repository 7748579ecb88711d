"""Free scalar field on a periodic 1+1 dimensional space-time lattice.

Derivatives are spectral, so ``-(d_t^2 - d_x^2 + m0^2)`` is diagonal in the
joint Fourier basis with eigenvalue ``omega_k^2 - p_q^2 - m0^2`` exactly.
Field configurations are arrays of shape ``(n_t, n_x)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError
from .lattice import TimeLattice, dft_matrix, make_lattice


@dataclass(frozen=True)
class SpacetimeLattice:
    n_t: int
    n_x: int
    dt: float = 1.0
    dx: float = 1.0

    @cached_property
    def time(self) -> TimeLattice:
        return make_lattice(self.n_t, self.dt)

    @cached_property
    def space(self) -> TimeLattice:
        # same construction; only the window and DFT are reused
        return make_lattice(self.n_x, self.dx)

    @property
    def omegas(self) -> np.ndarray:
        return self.time.omegas

    @property
    def momenta(self) -> np.ndarray:
        return self.space.omegas

    @property
    def volume(self) -> float:
        return self.n_t * self.dt * self.n_x * self.dx

    def dispersion(self, m0: float) -> np.ndarray:
        """``omega_k^2 - p_q^2 - m0^2`` indexed ``[k_row, q_row]``."""
        return self.omegas[:, None] ** 2 - self.momenta[None, :] ** 2 - m0**2


def make_spacetime(n_t: int, n_x: int, dt: float = 1.0, dx: float = 1.0) -> SpacetimeLattice:
    for name, v in (("n_t", n_t), ("n_x", n_x)):
        if int(v) != v or v < 1:
            raise InvalidArgumentError(f"{name} must be a positive integer")
    if not (dt > 0 and dx > 0):
        raise InvalidArgumentError("spacings must be positive")
    return SpacetimeLattice(int(n_t), int(n_x), float(dt), float(dx))


def _joint_dft(slat: SpacetimeLattice) -> np.ndarray:
    return np.kron(dft_matrix(slat.time), dft_matrix(slat.space))


def build_jrel(slat: SpacetimeLattice, m0: float) -> np.ndarray:
    """Dense one-body matrix of ``-(d^2 + m0^2)`` over flat sites ``j*n_x + n``."""
    if m0 < 0:
        raise InvalidArgumentError("m0 must be non-negative")
    F = _joint_dft(slat)
    J = F.conj().T @ (slat.dispersion(m0).ravel()[:, None] * F)
    return 0.5 * (J + J.conj().T)


def plane_wave(slat: SpacetimeLattice, k: int, q: int, amplitude: complex = 1.0) -> np.ndarray:
    """``c exp(-i omega_k t + i p_q x)`` sampled on the sites."""
    t = slat.time.times
    x = slat.space.times
    w = 2 * np.pi * k / (slat.n_t * slat.dt)
    p = 2 * np.pi * q / (slat.n_x * slat.dx)
    return amplitude * np.exp(-1j * w * t[:, None] + 1j * p * x[None, :])


def _field(slat, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=complex)
    if phi.shape != (slat.n_t, slat.n_x):
        raise InvalidArgumentError(f"field must have shape {(slat.n_t, slat.n_x)}")
    return phi


def action_expectation(slat: SpacetimeLattice, m0: float, phi, jrel: np.ndarray | None = None) -> float:
    """Coherent-state expectation of the relativistic action, ``dt dx phi^dag J phi``.

    For the coherent history of the field ``phi`` the amplitudes per site are
    ``sqrt(dt dx) phi``, so the normalized expectation reduces to this
    quadratic form, independent of the field's norm.
    """
    phi = _field(slat, phi)
    if not np.any(phi):
        raise InvalidArgumentError("zero field: expectation ratio undefined")
    J = build_jrel(slat, m0) if jrel is None else jrel
    f = phi.ravel()
    val = slat.dt * slat.dx * np.vdot(f, J @ f)
    return float(val.real)


def _spectral_derivative(phi: np.ndarray, axis: int, spacing: float) -> np.ndarray:
    n = phi.shape[axis]
    k = np.fft.fftfreq(n) * n
    # fold the unpaired Nyquist index onto the window's negative end
    k = np.where(k == n / 2, -n / 2, k) if n % 2 == 0 else k
    freq = 2 * np.pi * k / (n * spacing)
    shape = [1, 1]
    shape[axis] = n
    return np.fft.ifft(1j * freq.reshape(shape) * np.fft.fft(phi, axis=axis), axis=axis)


def classical_action(slat: SpacetimeLattice, m0: float, phi) -> float:
    """Summed-by-parts form ``dt dx sum(|d_t phi|^2 - |d_x phi|^2 - m0^2 |phi|^2)`` via FFT."""
    phi = _field(slat, phi)
    dt_phi = _spectral_derivative(phi, 0, slat.dt)
    dx_phi = _spectral_derivative(phi, 1, slat.dx)
    dens = np.abs(dt_phi) ** 2 - np.abs(dx_phi) ** 2 - m0**2 * np.abs(phi) ** 2
    return float(slat.dt * slat.dx * dens.sum())


@dataclass
class MassShell:
    modes: list[tuple[int, int]]
    zero_modes: list[tuple[int, int]]

    @property
    def dimension(self) -> int:
        return len(self.modes)


def mass_shell_modes(slat: SpacetimeLattice, m0: float, tol: float = 1e-9,
                     positive_frequency: bool = False) -> MassShell:
    """Lattice pairs ``(k, q)`` on the shell ``omega_k^2 - p_q^2 = m0^2``.

    With ``positive_frequency`` only ``omega_k >= 0`` is kept; points with
    ``omega_k = 0`` are never dropped and are listed in ``zero_modes``.
    """
    if not tol > 0:
        raise InvalidArgumentError("tol must be positive")
    D = slat.dispersion(m0)
    modes, zeros = [], []
    for a, k in enumerate(slat.time.k_window):
        for b, q in enumerate(slat.space.k_window):
            if abs(D[a, b]) > tol:
                continue
            if positive_frequency and k < 0:
                continue
            modes.append((int(k), int(q)))
            if k == 0:
                zeros.append((int(k), int(q)))
    return MassShell(modes, zeros)


def translation_operators(slat: SpacetimeLattice) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic one-site shifts in time and in space on the flat site basis."""
    St = np.roll(np.eye(slat.n_t), 1, axis=1)
    Sx = np.roll(np.eye(slat.n_x), 1, axis=1)
    return np.kron(St, np.eye(slat.n_x)), np.kron(np.eye(slat.n_t), Sx)
