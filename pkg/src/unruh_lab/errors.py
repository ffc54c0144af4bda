"""Exception hierarchy shared by all modules."""


class UnruhLabError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(UnruhLabError, ValueError):
    """Invalid input. ``field`` names the offending parameter when known."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NonPositiveSlope(ValidationError):
    pass


class BadKnots(ValidationError):
    pass


class NonPositiveParameter(ValidationError):
    pass


class NonPositiveEpsilon(NonPositiveParameter):
    pass


class NonPositiveAcceleration(NonPositiveParameter):
    pass


class SuperluminalVelocity(ValidationError):
    pass


class NoConvergence(UnruhLabError):
    pass


class EmptyFeasibleRegion(UnruhLabError):
    pass


class NoContour(UnruhLabError):
    pass


class LeftFeasibleRegion(UnruhLabError):
    pass


class NoTransparencyFound(UnruhLabError):
    pass


class DegenerateAmplitudes(UnruhLabError, ZeroDivisionError):
    pass


class WindowTooShort(UnruhLabError):
    pass
