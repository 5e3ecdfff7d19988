"""Exception types raised by the cone-billiard machinery."""


class ConeBilliardsError(Exception):
    """Base class for all package errors."""


class InvalidGeometryError(ConeBilliardsError, ValueError):
    """Generatrix or cone parameters violate positivity/convexity requirements."""


class TangencyError(ConeBilliardsError):
    """A ray meets the cone below the transversality margin; the line is rejected."""


class ApexError(ConeBilliardsError):
    """An intersection point landed below the apex cutoff."""


class NotReflectable(ConeBilliardsError):
    """The line has no forward exit point, so the billiard map is not defined on it."""


class NearBoundaryError(ConeBilliardsError):
    """Classification failed because the line is too close to a tangency or the apex."""

    def __init__(self, reason, message=""):
        self.reason = reason
        super().__init__(message or f"line too close to the phase-space boundary ({reason})")


class MaxReflectionsExceeded(ConeBilliardsError):
    """Trace exceeded the reflection cap; carries the partial trajectory for diagnosis."""

    def __init__(self, message, partial=None):
        self.partial = partial
        super().__init__(message)


class SamplingExhausted(ConeBilliardsError):
    """Rejection sampling failed to produce an accepted line within the draw budget."""


class StencilDiscontinuityError(ConeBilliardsError):
    """A finite-difference stencil straddles a discontinuity of the evaluated function."""


class TraceInternalError(ConeBilliardsError):
    """Intersection bookkeeping lost a root mid-trace; indicates a bug or extreme grazing."""


class ConfigError(ConeBilliardsError, ValueError):
    """Malformed run configuration (unknown keys, bad values, unusable grids)."""
