"""Exception types raised across the package."""


class AnnulusXingError(Exception):
    """Base class for all package errors."""


class DomainError(AnnulusXingError, ValueError):
    """An argument lies outside the domain of the function."""


class ConvergenceError(AnnulusXingError, RuntimeError):
    """A series could not reach the requested tolerance within its term cap."""


class InsufficientRootsError(ConvergenceError):
    """The supplied root set is too short for the requested tolerance."""


class RootBracketError(AnnulusXingError, RuntimeError):
    """A bracketing interval failed to show a sign change."""


class QuadratureError(AnnulusXingError, RuntimeError):
    """Adaptive quadrature exhausted its budget before meeting tolerance."""


class DegenerateMeshError(AnnulusXingError, ValueError):
    """The discretized annulus does not have exactly two boundary components."""
