"""Periodic time lattice, its frequency window and the unitary DFT.

Conventions fixed here are inherited by every other module:

* sites ``t_j = t_start + j*dt`` for ``j = 0..N-1`` with period ``T = N*dt``;
* frequency window ``k = -floor(N/2) .. ceil(N/2)-1``, ``omega_k = 2*pi*k/T``;
* ``F[k, j] = exp(i omega_k t_j) / sqrt(N)`` so that ``A(omega_k) = sum_j F[k, j] A_j``;
* site operators are the dimensionless ``A_j = sqrt(dt) A(t_j)``. Every
  matrix in this package acts on the ``A_j``; the ``1/sqrt(dt)`` density
  factor is never applied implicitly.

The one-body generator of time translations is ``p = F^dag diag(omega) F``,
which acts on site wavefunctions as ``i d/dt``. With ``TRANSLATION_SIGN = +1``
it satisfies ``exp(-i p dt) e_{j+1} = e_j``, i.e. conjugation by
``exp(i P dt)`` moves site operators one step forward in time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidArgumentError

# Global sign of the translation generator. Flipping it is only meant for
# mutation tests; every module reads it through ``onebody_pt``.
TRANSLATION_SIGN = 1


@dataclass(frozen=True)
class TimeLattice:
    n_sites: int
    dt: float
    t_start: float

    @property
    def period(self) -> float:
        return self.n_sites * self.dt

    T = period

    @cached_property
    def k_window(self) -> np.ndarray:
        n = self.n_sites
        return np.arange(-(n // 2), (n + 1) // 2)

    @cached_property
    def omegas(self) -> np.ndarray:
        return 2.0 * np.pi * self.k_window / self.period

    @cached_property
    def times(self) -> np.ndarray:
        return self.t_start + self.dt * np.arange(self.n_sites)

    @property
    def zero_index(self) -> int:
        """Row of the DFT matrix that carries omega = 0."""
        return self.n_sites // 2

    def site_index(self, t: float, tol: float = 1e-9) -> int:
        """Index of the lattice site at time ``t``, reduced modulo the period."""
        x = (t - self.t_start) / self.dt
        j = round(x)
        if abs(x - j) > tol * max(1.0, abs(x)):
            raise InvalidArgumentError(f"time {t} is not on the lattice")
        return int(j) % self.n_sites

    def steps(self, delta_t: float, tol: float = 1e-9) -> int:
        """Number of lattice steps in ``delta_t`` (must lie in dt*Z)."""
        x = delta_t / self.dt
        d = round(x)
        if abs(x - d) > tol * max(1.0, abs(x)):
            raise InvalidArgumentError(f"interval {delta_t} is not a multiple of dt={self.dt}")
        return int(d)


def make_lattice(n_sites: int, dt: float, t_start: float | None = None) -> TimeLattice:
    if int(n_sites) != n_sites or n_sites < 1:
        raise InvalidArgumentError(f"n_sites must be a positive integer, got {n_sites!r}")
    if not dt > 0:
        raise InvalidArgumentError(f"dt must be positive, got {dt!r}")
    if t_start is None:
        t_start = -0.5 * n_sites * dt
    return TimeLattice(int(n_sites), float(dt), float(t_start))


@dataclass(frozen=True)
class ModeIndexing:
    """Flattening of (site j, mode m) pairs, site-major: ``flat = j*M + m``."""

    n_sites: int
    n_space_modes: int = 1
    basis_tag: str = field(default="site")

    def __post_init__(self):
        if self.basis_tag not in ("site", "frequency"):
            raise InvalidArgumentError(f"unknown basis tag {self.basis_tag!r}")

    @property
    def size(self) -> int:
        return self.n_sites * self.n_space_modes

    def flatten(self, j: int, m: int) -> int:
        if not (0 <= j < self.n_sites and 0 <= m < self.n_space_modes):
            raise InvalidArgumentError(f"index ({j}, {m}) out of range")
        return j * self.n_space_modes + m

    def unflatten(self, flat: int) -> tuple[int, int]:
        if not 0 <= flat < self.size:
            raise InvalidArgumentError(f"flat index {flat} out of range")
        return divmod(flat, self.n_space_modes)


def dft_matrix(lat: TimeLattice) -> np.ndarray:
    return np.exp(1j * np.outer(lat.omegas, lat.times)) / np.sqrt(lat.n_sites)


def onebody_pt(lat: TimeLattice) -> np.ndarray:
    """Single-particle time-translation generator in the site basis."""
    F = dft_matrix(lat)
    p = F.conj().T @ (TRANSLATION_SIGN * lat.omegas[:, None] * F)
    return 0.5 * (p + p.conj().T)


def shift_matrix(lat: TimeLattice, steps: int = 1) -> np.ndarray:
    """Exact ``exp(-i p dt * steps)``: the cyclic permutation ``e_{j+steps} -> e_j``."""
    n = lat.n_sites
    S = np.zeros((n, n))
    S[np.arange(n), (np.arange(n) + steps) % n] = 1.0
    return S


def wrap_phase(x, period):
    """Map ``x`` into the symmetric interval ``[-period/2, period/2)``."""
    x = np.asarray(x, dtype=float)
    return (x + 0.5 * period) % period - 0.5 * period
