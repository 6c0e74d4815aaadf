"""Exception hierarchy shared by all modules."""


class SpiLabError(Exception):
    """Base class for every error raised by spilab."""


class BracketError(SpiLabError, ValueError):
    """A root bracket does not contain a sign change."""


class ConvergenceError(SpiLabError, RuntimeError):
    """An iterative method ran out of iterations."""


class NonIntegrableError(SpiLabError, ValueError):
    """The density exp(-V) is not integrable."""


class DomainTooSmallError(SpiLabError, ValueError):
    """The truncated domain leaves too much mass outside."""


class ParseError(SpiLabError, ValueError):
    """Malformed potential expression.

    Attributes
    ----------
    position : int
        Zero-based character offset of the offending token.
    """

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} at offset {position}")
        self.position = position


class InsufficientSpectrumError(SpiLabError, ValueError):
    """Not enough eigenpairs were computed to cover the requested range."""


class HypothesisError(SpiLabError, ValueError):
    """A hypothesis of a conversion or bound does not hold on the supplied data."""


class NonFiniteError(SpiLabError, ValueError):
    """NaN or infinity met where a finite value is required."""
