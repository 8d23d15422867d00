"""Exception types.  Numeric failures are raised, never replaced by NaN."""


class WanderingError(Exception):
    pass


class ValidationError(WanderingError, ValueError):
    """Bad parameters or a configuration that fails its schema."""


class FamilyOverflowError(WanderingError, OverflowError):
    """A quantity left the double range; ``index`` names the offending term."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class HorizonError(FamilyOverflowError):
    """An evaluation needs zeros beyond the generated part of the sequence."""


class RebaseError(WanderingError, ValueError):
    """A scaled point is outside the accepted band around its base zero."""


class PoleError(WanderingError, ZeroDivisionError):
    """Logarithmic derivative requested at (or numerically on) a zero."""


class RadiusOnZero(WanderingError, ValueError):
    """A counting circle passes through a zero of the product."""


class CountUnreliable(WanderingError):
    """Argument-principle count did not settle on an integer."""


class NoConvergence(WanderingError):
    pass


class LeftAnnulus(WanderingError):
    """Newton iterate escaped the annulus that should contain the root."""


class BracketFailed(WanderingError):
    def __init__(self, message, values=None):
        super().__init__(message)
        self.values = values


class SkippedSmallK(WanderingError):
    """The test circles overlap neighbouring zeros at this index."""


class MissingCriticalPoint(WanderingError, KeyError):
    pass


class DegenerateAnnulus(WanderingError):
    """A separating annulus came out with non-positive modulus."""


class OutOfDomain(WanderingError, ValueError):
    """A point or curve leaves the annulus."""
