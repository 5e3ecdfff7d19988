"""Cone geometry: strictly convex cross-sections in the plane x_n = 1, the
implicit surface of the cone over them, and ray-cone intersection.

Two cross-section families are supported:

* ``QuadricGeneratrix`` -- an ellipse/ellipsoid with given semi-axes; works in
  any dimension and admits analytic (quadratic) ray intersection.
* ``RadialGeneratrix`` -- a positive trigonometric-polynomial radial function
  r(phi) in dimension 3; intersections are found by adaptive bracketing and
  safeguarded Newton refinement.  This family produces genuinely non-quadric
  cones.

The implicit function F is negative inside the solid cone and positively
homogeneous (degree 2 for the quadric variant, degree 1 for the radial one).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from . import _status, kernels
from .errors import (
    ApexError,
    InvalidGeometryError,
    TangencyError,
    TraceInternalError,
)

MAX_DIMENSION = 16
MAX_HARMONICS = 64


@dataclass(frozen=True)
class QuadricGeneratrix:
    """Elliptic cross-section with semi-axes ``axes`` (one per transverse
    coordinate); the cone over it is the quadric sum((x_i/a_i)^2) = x_n^2."""

    axes: tuple[float, ...]

    def __post_init__(self):
        axes = tuple(float(a) for a in self.axes)
        object.__setattr__(self, "axes", axes)
        if len(axes) < 2:
            raise InvalidGeometryError("need at least two semi-axes (dimension >= 3)")
        if any(not np.isfinite(a) or a <= 0.0 for a in axes):
            raise InvalidGeometryError(f"semi-axes must be positive, got {axes}")

    @property
    def dimension(self):
        return len(self.axes) + 1


@dataclass(frozen=True)
class RadialGeneratrix:
    """Cross-section given in polar form r(phi) = mean + sum of harmonics
    (dimension 3 only).

    Positivity and the strict-convexity condition
    r^2 + 2 r'^2 - r r'' > 0 are checked on a uniform grid of
    ``convexity_grid`` angles at construction time.
    """

    mean: float
    cos_coeffs: tuple[float, ...] = ()
    sin_coeffs: tuple[float, ...] = ()
    convexity_grid: int = 4096

    def __post_init__(self):
        object.__setattr__(self, "mean", float(self.mean))
        object.__setattr__(self, "cos_coeffs", tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs", tuple(float(c) for c in self.sin_coeffs))
        if self.convexity_grid < 4096:
            raise InvalidGeometryError("convexity grid must have at least 4096 angles")
        if max(len(self.cos_coeffs), len(self.sin_coeffs)) > MAX_HARMONICS:
            raise InvalidGeometryError(f"at most {MAX_HARMONICS} harmonics supported")
        r, rp, rpp = self.profile(self.check_angles())
        if not np.all(np.isfinite(r)):
            raise InvalidGeometryError("radial function is not finite")
        if r.min() <= 0.0:
            raise InvalidGeometryError(f"radial function must be positive, min r = {r.min():.6g}")
        curv = r * r + 2.0 * rp * rp - r * rpp
        if curv.min() <= 0.0:
            raise InvalidGeometryError(
                f"cross-section is not strictly convex: min(r^2 + 2r'^2 - r r'') = {curv.min():.6g}"
            )

    @property
    def harmonics(self):
        return max(len(self.cos_coeffs), len(self.sin_coeffs))

    def check_angles(self):
        """Cell-midpoint grid used for the positivity/convexity checks.

        Midpoints (2i+1)*pi/N with N a power of two never coincide with the
        rational-multiple-of-pi angles where a pure harmonic attains its
        extrema, so borderline cross-sections are judged by nearby values
        rather than by an exact zero of the curvature expression.
        """
        n = self.convexity_grid
        return (np.arange(n) + 0.5) * (2.0 * np.pi / n)

    def profile(self, phi):
        """Vectorised r, r', r'' at the given angles."""
        phi = np.asarray(phi, dtype=float)
        r = np.full_like(phi, self.mean)
        rp = np.zeros_like(phi)
        rpp = np.zeros_like(phi)
        kh = self.harmonics
        a = np.zeros(kh)
        b = np.zeros(kh)
        a[: len(self.cos_coeffs)] = self.cos_coeffs
        b[: len(self.sin_coeffs)] = self.sin_coeffs
        for k in range(kh):
            kk = k + 1.0
            c = np.cos(kk * phi)
            s = np.sin(kk * phi)
            r += a[k] * c + b[k] * s
            rp += kk * (b[k] * c - a[k] * s)
            rpp -= kk * kk * (a[k] * c + b[k] * s)
        return r, rp, rpp

    def bounds(self):
        """Safe lower/upper bounds for r over all angles (grid extrema padded
        by a Lipschitz margin, so the true extrema are always enclosed)."""
        r, _, _ = self.profile(self.check_angles())
        kh = self.harmonics
        a = np.zeros(kh)
        b = np.zeros(kh)
        a[: len(self.cos_coeffs)] = self.cos_coeffs
        b[: len(self.sin_coeffs)] = self.sin_coeffs
        lip = sum((k + 1.0) * (abs(a[k]) + abs(b[k])) for k in range(kh))
        margin = lip * (np.pi / self.convexity_grid) + 1e-12
        rmin = float(r.min()) - margin
        rmax = float(r.max()) + margin
        if rmin <= 0.0:
            raise InvalidGeometryError("radial function too close to zero for a safe bound")
        return rmin, rmax

    @property
    def dimension(self):
        return 3


Generatrix = QuadricGeneratrix | RadialGeneratrix


@dataclass(frozen=True)
class Cone:
    """The cone over a strictly convex cross-section, as an implicit surface.

    ``apex_cutoff`` is the minimum admissible height of an intersection point
    (the apex itself is a genuine singularity and is never approximated);
    ``transversal_cutoff`` is the minimum |cos| between a line direction and
    the surface normal at a hit.
    """

    generatrix: Generatrix
    dimension: int
    apex_cutoff: float = 1e-8
    transversal_cutoff: float = 1e-8
    surface_tol: float | None = None

    def __post_init__(self):
        if self.dimension != self.generatrix.dimension:
            raise InvalidGeometryError(
                f"dimension {self.dimension} does not match the cross-section "
                f"(expected {self.generatrix.dimension})"
            )
        if not 3 <= self.dimension <= MAX_DIMENSION:
            raise InvalidGeometryError(f"dimension must be in [3, {MAX_DIMENSION}]")
        if self.apex_cutoff <= 0.0 or self.transversal_cutoff <= 0.0:
            raise InvalidGeometryError("cutoffs must be positive")

    @property
    def is_quadric(self):
        return isinstance(self.generatrix, QuadricGeneratrix)

    @property
    def homogeneity_degree(self):
        return 2 if self.is_quadric else 1

    @property
    def tol_surface(self):
        if self.surface_tol is not None:
            return self.surface_tol
        return 1e-12 if self.is_quadric else 1e-10

    @cached_property
    def packed(self):
        """Flat float64 encoding consumed by the kernel backends."""
        if self.is_quadric:
            g = self.generatrix
            geo = np.empty(5 + len(g.axes))
            geo[0] = 0.0
            geo[1] = float(self.dimension)
            geo[2] = self.apex_cutoff
            geo[3] = self.transversal_cutoff
            geo[4] = self.tol_surface
            geo[5:] = [1.0 / (a * a) for a in g.axes]
            return geo
        g = self.generatrix
        kh = g.harmonics
        rmin, rmax = g.bounds()
        geo = np.zeros(9 + 2 * kh)
        geo[0] = 1.0
        geo[1] = 3.0
        geo[2] = self.apex_cutoff
        geo[3] = self.transversal_cutoff
        geo[4] = self.tol_surface
        geo[5] = float(kh)
        geo[6] = rmin
        geo[7] = rmax
        geo[8] = g.mean
        geo[9 : 9 + len(g.cos_coeffs)] = g.cos_coeffs
        geo[9 + kh : 9 + kh + len(g.sin_coeffs)] = g.sin_coeffs
        return geo

    def spec_dict(self):
        if self.is_quadric:
            return {"variant": "quadric", "axes": list(self.generatrix.axes),
                    "dimension": self.dimension}
        return {
            "variant": "radial",
            "mean": self.generatrix.mean,
            "cos_coeffs": list(self.generatrix.cos_coeffs),
            "sin_coeffs": list(self.generatrix.sin_coeffs),
            "dimension": self.dimension,
        }

    def spec_hash(self):
        blob = json.dumps(self.spec_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


def quadric_cone(axes, **kwargs):
    gen = QuadricGeneratrix(tuple(axes))
    return Cone(gen, gen.dimension, **kwargs)


def radial_cone(mean, cos_coeffs=(), sin_coeffs=(), convexity_grid=4096, **kwargs):
    gen = RadialGeneratrix(mean, tuple(cos_coeffs), tuple(sin_coeffs), convexity_grid)
    return Cone(gen, 3, **kwargs)


class Crossing(Enum):
    ENTERING = -1  # the line passes from outside to inside the solid cone
    EXITING = 1


@dataclass(frozen=True)
class SurfaceHit:
    """One transversal intersection of an oriented line with the cone."""

    s: float
    q: np.ndarray
    unit_normal: np.ndarray
    crossing: Crossing
    transversality: float


def implicit_value(cone, x):
    """Evaluate the implicit cone function; negative inside the solid cone."""
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape != (cone.dimension,):
        raise ValueError(f"expected a point in R^{cone.dimension}")
    if x[-1] <= 0.0:
        raise ValueError("implicit value is only defined on the upper half-space x_n > 0")
    return float(kernels.implicit_value(cone.packed, x))


def implicit_gradient(cone, x):
    """Analytic gradient of :func:`implicit_value`."""
    x = np.ascontiguousarray(x, dtype=float)
    if x.shape != (cone.dimension,):
        raise ValueError(f"expected a point in R^{cone.dimension}")
    if x[-1] <= 0.0:
        raise ValueError("gradient is only defined on the upper half-space x_n > 0")
    out = np.empty(cone.dimension)
    st = kernels.implicit_gradient(cone.packed, x, out)
    if st == _status.DOMAIN:
        raise ValueError("gradient is undefined on the cone axis for the radial variant")
    return out


def implicit_hessian(cone, x):
    """Analytic Hessian of :func:`implicit_value`; used by the tangent map of
    the billiard (implicit differentiation of the reflection point)."""
    x = np.ascontiguousarray(x, dtype=float)
    n = cone.dimension
    if x.shape != (n,):
        raise ValueError(f"expected a point in R^{n}")
    if x[-1] <= 0.0:
        raise ValueError("Hessian is only defined on the upper half-space x_n > 0")
    if cone.is_quadric:
        h = np.zeros((n, n))
        for i, a in enumerate(cone.generatrix.axes):
            h[i, i] = 2.0 / (a * a)
        h[n - 1, n - 1] = -2.0
        return h
    u, w, t = x
    rho2 = u * u + w * w
    if rho2 <= 0.0:
        raise ValueError("Hessian is undefined on the cone axis for the radial variant")
    rho = np.sqrt(rho2)
    rho3 = rho2 * rho
    rho4 = rho2 * rho2
    r, rp, rpp = (float(val) for val in cone.generatrix.profile(np.arctan2(w, u)))
    h = np.empty((3, 3))
    h[0, 0] = w * w / rho3 - t * w * (rpp * w + 2.0 * rp * u) / rho4
    h[1, 1] = u * u / rho3 - t * u * (rpp * u - 2.0 * rp * w) / rho4
    h[0, 1] = h[1, 0] = -u * w / rho3 + t * (rpp * u * w + rp * (u * u - w * w)) / rho4
    h[0, 2] = h[2, 0] = rp * w / rho2
    h[1, 2] = h[2, 1] = -rp * u / rho2
    h[2, 2] = 0.0
    return h


def ray_intersections(cone, line):
    """All transversal hits of the oriented line with the cone, sorted by the
    line parameter.

    Raises :class:`TangencyError` when any hit falls below the transversality
    margin and :class:`ApexError` when an intersection lands below the apex
    cutoff; such lines are rejected rather than silently kept.
    """
    n = cone.dimension
    hs = np.empty(2)
    hq = np.empty((2, n))
    hn = np.empty((2, n))
    hm = np.empty((2, 3))
    st, nh = kernels.intersections(cone.packed, line.v, line.Q, hs, hq, hn, hm)
    if st == _status.TANGENT:
        raise TangencyError("line meets the cone below the transversality margin")
    if st == _status.APEX:
        raise ApexError("intersection below the apex cutoff")
    if st != _status.OK:
        raise TraceInternalError(f"intersection bookkeeping failed ({_status.NAMES[st]})")
    hits = []
    for j in range(nh):
        crossing = Crossing.EXITING if hm[j, 0] > 0.0 else Crossing.ENTERING
        hits.append(
            SurfaceHit(
                s=float(hs[j]),
                q=hq[j].copy(),
                unit_normal=hn[j].copy(),
                crossing=crossing,
                transversality=float(hm[j, 1]),
            )
        )
    return hits
