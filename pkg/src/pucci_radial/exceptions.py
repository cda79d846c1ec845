"""Exception hierarchy shared by all solver modules."""


class PucciRadialError(Exception):
    """Base class for errors raised by this package."""


class InvalidArgumentError(PucciRadialError, ValueError):
    pass


class DomainError(InvalidArgumentError):
    """A radius or parameter lies outside the domain of an operation."""


class EllipticityViolationError(PucciRadialError):
    """A user-supplied radial operator is not monotone/uniformly elliptic."""


class ResourceError(PucciRadialError):
    """The integrator exceeded its step budget."""


class EventBracketError(PucciRadialError):
    """An event function does not change sign across the requested step."""


class IntegrationError(PucciRadialError):
    """Internal failure of a shot (e.g. blow-up before the first zero)."""


class NoBracketError(PucciRadialError):
    """Geometric scanning failed to bracket the target value."""

    def __init__(self, message, scanned=None):
        super().__init__(message)
        self.scanned = scanned


class NoRootInComponentError(PucciRadialError):
    """Bisection stagnated without matching the target radius."""


class NoKthZeroError(PucciRadialError):
    """A shot did not produce the requested number of zeros."""
