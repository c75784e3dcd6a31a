"""Exception hierarchy for ermakov_lab."""


class ErmakovLabError(Exception):
    """Base class for all errors raised by this package."""


class ConfigurationError(ErmakovLabError):
    """Invalid or inconsistent user-supplied configuration."""


class InvalidStateError(ErmakovLabError):
    """A dynamical state contains non-finite entries."""


class DomainError(ErmakovLabError):
    """An argument lies outside the mathematical domain of an operation."""


class WidthCollapseError(ErmakovLabError):
    """The reduced width alpha dropped below the collapse floor."""


class TrajectoryAborted(ErmakovLabError):
    """An integration failed mid-run; carries the partial trajectory."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class EvolutionAborted(ErmakovLabError):
    """A PDE evolution produced non-finite amplitudes."""


class DivergenceError(ErmakovLabError):
    """The wavefunction norm left the trusted window."""


class DegenerateStateError(ErmakovLabError):
    """The wavefunction has (numerically) zero norm."""


class GridMismatchError(ErmakovLabError):
    """Arrays defined on incompatible grids were combined."""


class InsufficientSupportError(ErmakovLabError):
    """Too few valid grid points to perform a fit."""
