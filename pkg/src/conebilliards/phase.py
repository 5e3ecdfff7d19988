"""The space of oriented lines, its constraint description, and the
classification of lines against a cone.

An oriented line is a pair (v, Q) with unit direction v and foot point Q (the
point of the line closest to the origin), i.e. a point of the tangent bundle
of the unit sphere.  Embedded in R^{2n} it is cut out by the two constraints
|v|^2 - 1 = 0 and <Q, v> = 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _status, kernels
from .errors import NearBoundaryError, SamplingExhausted

CONSTRAINT_TOL = 1e-12


@dataclass(frozen=True)
class OrientedLine:
    """Oriented line in R^n as (direction, foot point)."""

    v: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(self.v, dtype=float)
        Q = np.ascontiguousarray(self.Q, dtype=float)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "Q", Q)
        if v.shape != Q.shape or v.ndim != 1:
            raise ValueError("direction and foot point must be vectors of equal length")
        if abs(v @ v - 1.0) > CONSTRAINT_TOL:
            raise ValueError(f"direction is not unit: |v|^2 - 1 = {v @ v - 1.0:.3e}")
        if abs(Q @ v) > CONSTRAINT_TOL * (1.0 + float(np.abs(Q).max())):
            raise ValueError(f"foot point is not orthogonal to direction: <Q,v> = {Q @ v:.3e}")

    @property
    def dimension(self):
        return self.v.shape[0]

    def point(self, s):
        """Point on the line at parameter s."""
        return self.Q + s * self.v

    def reversed(self):
        return OrientedLine(-self.v, self.Q)


class LineClass(Enum):
    """Position of an oriented line relative to the solid cone.

    INBOUND   -- one hit, backward ray inside: arrives from infinity inside
                 the cone and will reflect.
    CHORD     -- two hits: a chord of the solid cone.
    ESCAPING  -- one hit, forward ray inside: leaves to infinity inside the
                 cone, no further reflections.
    OUTSIDE   -- no intersection with the cone.
    """

    INBOUND = "inbound"
    CHORD = "chord"
    ESCAPING = "escaping"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class PhaseClass:
    tag: LineClass
    boundary_flag: bool = False

    @property
    def reflectable(self):
        return self.tag in (LineClass.INBOUND, LineClass.CHORD)


@dataclass(frozen=True)
class TangentVector:
    """Tangent vector to the constraint manifold at a base line, split into
    foot-point and direction components."""

    xi_x: np.ndarray
    xi_v: np.ndarray


def line_through(p, v):
    """The oriented line through point p with unit direction v."""
    p = np.ascontiguousarray(p, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    if abs(v @ v - 1.0) > CONSTRAINT_TOL:
        raise ValueError("direction must be a unit vector")
    Q = p - (p @ v) * v
    Q = Q - (Q @ v) * v  # second pass keeps <Q,v> at rounding for far points
    return OrientedLine(v, Q)


def retract(x, v):
    """Project an arbitrary (foot point, direction) pair back onto the space
    of oriented lines: normalise v, then remove the component of x along it.

    Idempotent to rounding; used to keep finite-difference stencils on the
    constraint manifold.
    """
    x = np.ascontiguousarray(x, dtype=float)
    v = np.ascontiguousarray(v, dtype=float)
    nv = float(np.sqrt(v @ v))
    if nv <= 0.5:
        raise ValueError("direction too short to normalise safely")
    vhat = v / nv
    Q = x - (x @ vhat) * vhat
    Q = Q - (Q @ vhat) * vhat
    return OrientedLine(vhat, Q)


def classify(cone, line):
    """Classify an oriented line against the cone.

    The boundary flag is set when any hit is within ten transversality
    margins of tangency.  Lines failing the margin itself (or reaching the
    apex cutoff) raise :class:`NearBoundaryError`.
    """
    n = cone.dimension
    hs = np.empty(2)
    hq = np.empty((2, n))
    hn = np.empty((2, n))
    hm = np.empty((2, 3))
    st, nh = kernels.intersections(cone.packed, line.v, line.Q, hs, hq, hn, hm)
    if st == _status.TANGENT:
        raise NearBoundaryError("tangency")
    if st == _status.APEX:
        raise NearBoundaryError("apex")
    if st != _status.OK:
        raise NearBoundaryError("tangency", f"intersection failed ({_status.NAMES[st]})")
    if nh == 0:
        return PhaseClass(LineClass.OUTSIDE)
    flag = bool(np.any(hm[:nh, 1] < 10.0 * cone.transversal_cutoff))
    if nh == 2:
        return PhaseClass(LineClass.CHORD, flag)
    if hm[0, 0] > 0.0:
        return PhaseClass(LineClass.INBOUND, flag)
    return PhaseClass(LineClass.ESCAPING, flag)


def surface_point(cone, rng):
    """Random point on the cone: a cross-section point scaled by a uniform
    height t in [0.5, 2]."""
    t = rng.uniform(0.5, 2.0)
    if cone.is_quadric:
        u = rng.normal(size=cone.dimension - 1)
        u /= np.sqrt(u @ u)
        p = np.append(np.asarray(cone.generatrix.axes) * u, 1.0)
    else:
        phi = rng.uniform(0.0, 2.0 * np.pi)
        r, _, _ = cone.generatrix.profile(phi)
        p = np.array([r * np.cos(phi), r * np.sin(phi), 1.0])
    return t * p


@dataclass(frozen=True)
class SampleBatch:
    lines: list
    draws: int
    rejected: int


def sample_psi(cone, rng_seed, count):
    """Deterministically sample ``count`` chords of the cone.

    Draws pairs of surface points, forms the oriented line through them and
    keeps it only when it classifies as a clean chord (no boundary flag).
    Returns the accepted lines together with draw/rejection statistics.
    """
    if count < 0:
        raise ValueError("count must be non-negative")
    rng = np.random.default_rng(rng_seed)
    lines = []
    draws = 0
    rejected = 0
    misses = 0
    while len(lines) < count:
        if misses >= 10**6:
            raise SamplingExhausted(
                f"no acceptable chord in {misses} consecutive draws (seed {rng_seed})"
            )
        draws += 1
        q1 = surface_point(cone, rng)
        q2 = surface_point(cone, rng)
        d = q2 - q1
        nd = float(np.sqrt(d @ d))
        if nd < 1e-9:
            rejected += 1
            misses += 1
            continue
        line = line_through(q1, d / nd)
        try:
            cls = classify(cone, line)
        except NearBoundaryError:
            rejected += 1
            misses += 1
            continue
        if cls.tag is LineClass.CHORD and not cls.boundary_flag:
            lines.append(line)
            misses = 0
        else:
            rejected += 1
            misses += 1
    return SampleBatch(lines, draws, rejected)
