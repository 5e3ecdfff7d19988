"""Billiards inside convex cones: geometry, symplectic structure on the space
of oriented lines, lifted first integrals, and numerical verification
campaigns for their conservation, involution and independence.
"""

from .kernels import BACKEND
from .errors import (
    ApexError,
    ConeBilliardsError,
    ConfigError,
    InvalidGeometryError,
    MaxReflectionsExceeded,
    NearBoundaryError,
    NotReflectable,
    SamplingExhausted,
    StencilDiscontinuityError,
    TangencyError,
    TraceInternalError,
)
from .geometry import (
    Cone,
    Crossing,
    QuadricGeneratrix,
    RadialGeneratrix,
    SurfaceHit,
    implicit_gradient,
    implicit_value,
    quadric_cone,
    radial_cone,
    ray_intersections,
)
from .phase import (
    LineClass,
    OrientedLine,
    PhaseClass,
    TangentVector,
    classify,
    line_through,
    retract,
    sample_psi,
)

__version__ = "0.1.0"

__all__ = [
    "ApexError",
    "BACKEND",
    "Cone",
    "ConeBilliardsError",
    "ConfigError",
    "Crossing",
    "InvalidGeometryError",
    "LineClass",
    "MaxReflectionsExceeded",
    "NearBoundaryError",
    "NotReflectable",
    "OrientedLine",
    "PhaseClass",
    "QuadricGeneratrix",
    "RadialGeneratrix",
    "SamplingExhausted",
    "StencilDiscontinuityError",
    "SurfaceHit",
    "TangencyError",
    "TangentVector",
    "TraceInternalError",
    "classify",
    "implicit_gradient",
    "implicit_value",
    "line_through",
    "quadric_cone",
    "radial_cone",
    "ray_intersections",
    "retract",
    "sample_psi",
    "__version__",
]
