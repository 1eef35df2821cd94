"""Exception types raised by the library."""

from __future__ import annotations


class DiracEntropyError(Exception):
    """Base class for all library errors."""


class PreconditionError(DiracEntropyError, ValueError):
    """An input violates a documented precondition."""


class SingularPointError(PreconditionError):
    """A symbol was evaluated at its discontinuity point."""


class ResolutionError(PreconditionError):
    """The lattice spacing does not resolve the regularization length."""


class RegionError(PreconditionError):
    """A region is empty or does not fit the lattice with the required margin."""


class UnsupportedOrderError(PreconditionError):
    """A Renyi order outside the range covered by the positivity theory."""


class SizeError(PreconditionError):
    """A requested dense eigenproblem exceeds the configured size cap."""


class ComparisonError(PreconditionError):
    """Two results computed with different parameters were compared."""


class FitError(DiracEntropyError, ValueError):
    """A least-squares fit is degenerate."""


class NumericalError(DiracEntropyError, ArithmeticError):
    """A numerical routine failed or produced unusable output."""


class NumericalQualityError(NumericalError):
    """Too many eigenvalues fell outside [0, 1]."""


class AccuracyError(NumericalError):
    """A quadrature tolerance cannot be met."""


class SectionTooShortError(NumericalError):
    """The kernel has not decayed inside the finite section."""


class CoverageError(NumericalError):
    """A transverse profile does not cover enough of the integration range."""


class ConfigError(DiracEntropyError, ValueError):
    """An experiment configuration is invalid.

    Attributes
    ----------
    keys : list of str
        Offending dotted keys.
    """

    def __init__(self, message: str, keys=()):
        super().__init__(message)
        self.keys = list(keys)
