"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class StrongThermError(Exception):
    """Base class for errors raised by this package."""


class ShapeError(StrongThermError, ValueError):
    """Operand dimensions are inconsistent."""


class NumericalFailure(StrongThermError, ArithmeticError):
    """A numerical kernel failed to converge or lost accuracy."""


class RangeError(StrongThermError, OverflowError):
    """A matrix function would overflow double precision."""


class NotPositiveDefiniteError(NumericalFailure):
    """Raised when a logarithm is requested of a non positive-definite operand.

    Attributes
    ----------
    eigenvalue : float
        The smallest eigenvalue found.
    time : float or None
        Time point at which the failure happened, when known.
    """

    def __init__(self, eigenvalue: float, time: float | None = None, msg: str = ""):
        self.eigenvalue = float(eigenvalue)
        self.time = time
        where = f" at t={time:.17g}" if time is not None else ""
        super().__init__(
            msg or f"operand is not positive definite{where}: "
                   f"minimum eigenvalue {self.eigenvalue:.3e}")


class PropagationAccuracyError(NumericalFailure):
    """Propagated state left the set of density matrices beyond tolerance."""


class MapConstructionError(NumericalFailure):
    """A dynamical map failed its CPTP check."""


class InversionError(NumericalFailure):
    """A superoperator could not be inverted reliably.

    Attributes
    ----------
    condition : float
        Condition-number estimate of the offending matrix.
    """

    def __init__(self, condition: float, msg: str = ""):
        self.condition = float(condition)
        super().__init__(msg or f"superoperator is singular or ill-conditioned "
                                f"(condition estimate {self.condition:.3e})")


class UnsupportedConfigurationError(StrongThermError, ValueError):
    """The requested configuration lies outside what a routine supports."""


class DegenerateBranchError(StrongThermError, ValueError):
    """A measurement outcome has (numerically) zero probability."""


class ConfigError(StrongThermError, ValueError):
    """Invalid run configuration."""
