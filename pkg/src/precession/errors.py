"""Exception hierarchy shared by the library and the CLI."""


class PrecessionError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class DomainError(PrecessionError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 2


class UnsupportedRangeError(DomainError):
    """A closed form was requested outside the range where it is known."""


class ConfigurationError(PrecessionError, ValueError):
    """A density, state or run specification could not be interpreted."""

    exit_code = 2


class EigensolverError(PrecessionError, RuntimeError):
    """The dense eigensolver failed or missed its residual contract."""

    exit_code = 3

    def __init__(self, message, *, residual=float("nan"), iterations=None):
        detail = f"{message} (residual={residual:.3e}"
        if iterations is not None:
            detail += f", iterations={iterations}"
        super().__init__(detail + ")")
        self.residual = residual
        self.iterations = iterations


class ConsistencyError(PrecessionError, RuntimeError):
    """Two routes that must agree did not; indicates a bug, not bad input."""

    exit_code = 4
