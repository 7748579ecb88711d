"""Lattice history-space quantum mechanics: exact finite-dimensional checks."""
from .errors import (ConfigError, DegenerateDenominatorError, DimensionError, HistlatError,
                     InvalidArgumentError, UnknownCheckError, UnstableTheoryError, UnsupportedError)
from .lattice import TimeLattice, make_lattice
from .quadratic import QuadraticHamiltonian, oscillator
from .result import CheckResult

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateDenominatorError", "DimensionError", "HistlatError",
    "InvalidArgumentError", "UnknownCheckError", "UnstableTheoryError", "UnsupportedError",
    "TimeLattice", "make_lattice", "QuadraticHamiltonian", "oscillator", "CheckResult",
]
