"""Exception types shared across the library."""


class HauteurError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(HauteurError):
    """An input is outside the domain of the operation (zero polynomial, x = 0, ...)."""


class SingularCurveError(HauteurError):
    """The Weierstrass model has vanishing discriminant."""


class NotAnEllipticSurfaceError(SingularCurveError):
    """Discriminant vanishes identically over the function field."""


class NeedsModelChangeError(HauteurError):
    """A coefficient has a pole at the requested parameter; clear denominators first."""


class UndefinedAtOriginError(HauteurError):
    """Local or canonical heights are not defined at the origin O."""


class PoleError(HauteurError):
    """Evaluation at a pole of the function."""


class InsufficientDepthError(HauteurError):
    """Iteration depth too small to say anything."""


class ResourceLimitError(HauteurError):
    """Degree or size cap exceeded."""


class PrecisionError(HauteurError):
    """Floating-point over/underflow despite renormalization, or series precision exhausted."""


class RootFindingError(HauteurError):
    """Polynomial root finder failed to converge."""


class ConfigError(HauteurError):
    """Malformed job configuration."""

    def __init__(self, message, code="config-error"):
        super().__init__(message)
        self.code = code
