"""Check configuration: a small JSON document with a fixed schema.

Example::

    {
      "check": "diag/exponentiated",
      "name": "diag/exponentiated/fermi-N4",
      "lattice": {"n_sites": 4, "dt": 1.0},
      "theory": {"type": "oscillator", "frequency_index": 1},
      "engine": {"kind": "fock-fermi"},
      "tolerances": {"residual": 1e-10},
      "seed": 42,
      "options": {}
    }

``theory.frequency_index`` (an integer or list) sets ``omega0 = 2 pi k / T``
and is the convenient way to write commensurate theories; ``omega0`` sets
frequencies directly. Unknown keys are rejected at every level.
"""
from __future__ import annotations

import copy
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

import numpy as np

from ..errors import ConfigError
from ..lattice import TimeLattice, make_lattice
from ..quadratic import QuadraticHamiltonian

THEORY_TYPES = ("null", "oscillator", "quadratic", "fermion-mode", "rel-scalar")
ENGINES = ("onebody", "fock-bose", "fock-fermi")


def _from_dict(cls, data: dict, where: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{where} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown field(s) in {where}: {sorted(unknown)}")
    return cls(**data)


@dataclass
class LatticeConfig:
    n_sites: int = 4
    dt: float = 1.0
    t_start: float | None = None
    t0: float | None = None

    def build(self) -> TimeLattice:
        return make_lattice(self.n_sites, self.dt, self.t_start)


@dataclass
class TheoryConfig:
    type: str = "null"
    omega0: Any = None
    frequency_index: Any = None
    gamma: Any = None
    n_modes: int = 1
    m0: float = 0.0
    n_x: int | None = None
    dx: float | None = None

    def __post_init__(self):
        if self.type not in THEORY_TYPES:
            raise ConfigError(f"unknown theory type {self.type!r}; expected one of {THEORY_TYPES}")

    def omega_matrix(self, lat: TimeLattice) -> np.ndarray:
        M = self.n_modes
        if self.type == "null":
            return np.zeros((M, M), dtype=complex)
        if self.frequency_index is not None:
            k = np.atleast_1d(np.asarray(self.frequency_index, dtype=float))
            w = 2 * np.pi * k / lat.period
        elif self.omega0 is not None:
            w = np.asarray(self.omega0, dtype=complex)
        else:
            raise ConfigError("theory needs omega0 or frequency_index")
        if w.ndim <= 1:
            w = np.diag(np.broadcast_to(w, (M,))).astype(complex)
        if w.shape != (M, M):
            raise ConfigError(f"omega0 must be {M}x{M}")
        return w

    def hamiltonian(self, lat: TimeLattice) -> QuadraticHamiltonian:
        w = self.omega_matrix(lat)
        M = w.shape[0]
        g = np.zeros((M, M)) if self.gamma is None else np.asarray(self.gamma, dtype=complex)
        if g.ndim <= 1:
            g = np.diag(np.broadcast_to(g, (M,))).astype(complex)
        return QuadraticHamiltonian(w, g)


@dataclass
class EngineConfig:
    kind: str = "onebody"
    n_max: int = 1

    def __post_init__(self):
        if self.kind not in ENGINES:
            raise ConfigError(f"unknown engine {self.kind!r}; expected one of {ENGINES}")

    @property
    def statistics(self) -> str:
        return "bose" if self.kind == "fock-bose" else "fermi"


@dataclass
class CheckConfig:
    check: str
    name: str | None = None
    lattice: LatticeConfig = field(default_factory=LatticeConfig)
    theory: TheoryConfig = field(default_factory=TheoryConfig)
    engine: EngineConfig = field(default_factory=EngineConfig)
    tolerances: dict[str, float] = field(default_factory=dict)
    seed: int | None = None
    options: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.name is None:
            self.name = self.check
        if self.seed is not None:
            if int(self.seed) != self.seed or not 0 <= int(self.seed) < 2**64:
                raise ConfigError("seed must be a 64-bit unsigned integer")
            self.seed = int(self.seed)

    @classmethod
    def from_dict(cls, data: dict) -> "CheckConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data = copy.deepcopy(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown field(s) in config: {sorted(unknown)}")
        if "check" not in data:
            raise ConfigError("config needs a 'check' name")
        for key, sub in (("lattice", LatticeConfig), ("theory", TheoryConfig),
                         ("engine", EngineConfig)):
            if key in data:
                data[key] = _from_dict(sub, data[key], key)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def rng(self) -> np.random.Generator:
        if self.seed is None:
            raise ConfigError(f"check {self.check!r} uses randomness and needs a seed")
        return np.random.default_rng(self.seed)

    def with_value(self, path: str, value) -> "CheckConfig":
        """Copy with the dotted ``path`` (e.g. ``engine.n_max``) set to ``value``."""
        parts = path.split(".")
        data = self.to_dict()
        node = data
        for p in parts[:-1]:
            if not isinstance(node, dict) or p not in node:
                raise ConfigError(f"unknown parameter path {path!r}")
            node = node[p]
        leaf = parts[-1]
        if not isinstance(node, dict) or (leaf not in node and parts[0] != "options"):
            raise ConfigError(f"unknown parameter path {path!r}")
        current = node.get(leaf)
        if current is not None and (isinstance(current, bool) or not isinstance(current, (int, float))):
            raise ConfigError(f"parameter {path!r} is not numeric")
        node[leaf] = value
        return CheckConfig.from_dict(data)


def load_config(path: str | Path) -> CheckConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return CheckConfig.from_dict(data)


def merge_defaults(default: CheckConfig, override: CheckConfig | None) -> CheckConfig:
    return default if override is None else override


__all__ = [
    "CheckConfig", "LatticeConfig", "TheoryConfig", "EngineConfig", "load_config", "replace",
]
