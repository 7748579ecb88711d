"""Exception hierarchy shared by all histlat modules."""


class HistlatError(Exception):
    """Base class for every error raised by histlat."""


class InvalidArgumentError(HistlatError, ValueError):
    pass


class UnstableTheoryError(HistlatError):
    """Raised when a quadratic theory has no real normal form."""

    def __init__(self, message, eigenvalues=()):
        super().__init__(message)
        self.eigenvalues = list(eigenvalues)


class UnsupportedError(HistlatError):
    pass


class DimensionError(HistlatError):
    """A many-body space exceeds the configured safety bound."""

    def __init__(self, dim, bound):
        super().__init__(f"Hilbert space dimension {dim} exceeds safety bound {bound}")
        self.dim = dim
        self.bound = bound


class DegenerateDenominatorError(HistlatError):
    pass


class UnknownCheckError(HistlatError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ConfigError(HistlatError, ValueError):
    pass
