"""The ambient Poisson bracket on R^{2n}, the induced (Dirac) bracket on the
space of oriented lines, and numerical differentials of phase functions.

Functions are represented by evaluators on ambient pairs (x, v); gradients are
central finite differences taken in ambient coordinates, without retraction,
so evaluators must be defined slightly off the constraint manifold.  The two
constraint gradients entering the bracket correction are analytic and never
differenced.

The induced bracket on the constraint manifold is

    {f, g}_w = {f, g} - 1/2 ( {f, c1} {c2, g} - {f, c2} {c1, g} )

where c1 = |v|^2 - 1, c2 = <x, v> and {.,.} is the canonical bracket in the
(x, v) coordinates.  The off-manifold extension of a function does not affect
the value on the manifold, so any convenient extension (for lifted integrals:
evaluation after retraction) is admissible.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import StencilDiscontinuityError
from .phase import OrientedLine, TangentVector

Evaluator = Callable[[np.ndarray, np.ndarray], float]
Probe = Callable[[np.ndarray, np.ndarray], tuple]


@dataclass(frozen=True)
class PhaseFunction:
    """Scalar function on (a neighbourhood of) the space of oriented lines.

    ``smooth_domain_probe(x, v) -> (ok, m)`` marks points where the function
    is differentiable; for lifted integrals m is the reflection count, so a
    stencil crossing a discontinuity shows up as m-disagreement.

    ``gradient(x, v) -> (grad_x, grad_v)``, when present, is an exact ambient
    gradient (valid at points satisfying the line constraints) and is used in
    place of finite differences; lifted integrals provide it via the analytic
    tangent map of the billiard.
    """

    evaluator: Evaluator
    label: str
    smooth_domain_probe: Optional[Probe] = None
    gradient: Optional[Callable] = None

    def __call__(self, x, v):
        return self.evaluator(x, v)


@dataclass(frozen=True)
class BracketSample:
    """One bracket evaluation at a base line."""

    base: OrientedLine
    value_ambient: float
    value_dirac: float
    fd_step: float
    rejected: bool = False
    reason: Optional[str] = None


def effective_step(z, h):
    """Nominal step scaled by the size of the base point."""
    znorm = float(np.sqrt(z.Q @ z.Q + z.v @ z.v))
    return h * (1.0 + znorm)


def _check_stencil_probe(f, z, heff):
    probe = f.smooth_domain_probe
    if probe is None:
        return
    n = z.dimension
    ok, m_ref = probe(z.Q, z.v)
    if not ok:
        raise StencilDiscontinuityError(f"{f.label}: base point fails the smoothness probe")
    for i in range(n):
        for sign in (1.0, -1.0):
            x = z.Q.copy()
            x[i] += sign * heff
            ok, m = probe(x, z.v)
            if not ok or m != m_ref:
                raise StencilDiscontinuityError(
                    f"{f.label}: stencil crosses a discontinuity (x[{i}] side)"
                )
    for i in range(n):
        for sign in (1.0, -1.0):
            v = z.v.copy()
            v[i] += sign * heff
            ok, m = probe(z.Q, v)
            if not ok or m != m_ref:
                raise StencilDiscontinuityError(
                    f"{f.label}: stencil crosses a discontinuity (v[{i}] side)"
                )


def ambient_gradient(f, z, h):
    """Central-difference gradient of f in ambient coordinates at the line z.

    Returns (grad_x, grad_v).  The step is ``h`` scaled by (1 + |z|).  When
    the function carries a smoothness probe, every stencil point must agree
    with the base point, otherwise :class:`StencilDiscontinuityError` is
    raised and no value is produced.  Functions carrying an exact gradient
    are differentiated analytically (the probe gate still applies).
    """
    n = z.dimension
    heff = effective_step(z, h)
    _check_stencil_probe(f, z, heff)
    if f.gradient is not None:
        return f.gradient(z.Q, z.v)
    ev = f.evaluator
    grad_x = np.empty(n)
    grad_v = np.empty(n)
    for i in range(n):
        xp = z.Q.copy()
        xm = z.Q.copy()
        xp[i] += heff
        xm[i] -= heff
        grad_x[i] = (ev(xp, z.v) - ev(xm, z.v)) / (2.0 * heff)
    for i in range(n):
        vp = z.v.copy()
        vm = z.v.copy()
        vp[i] += heff
        vm[i] -= heff
        grad_v[i] = (ev(z.Q, vp) - ev(z.Q, vm)) / (2.0 * heff)
    return grad_x, grad_v


def poisson_ambient(f, g, z, h=1e-5):
    """Canonical Poisson bracket {f, g} at z, via finite-difference gradients."""
    fx, fv = ambient_gradient(f, z, h)
    gx, gv = ambient_gradient(g, z, h)
    return float(fx @ gv - fv @ gx)


def poisson_dirac(f, g, z, h=1e-5, drop_correction=False):
    """Induced bracket {f, g}_w at z.

    The constraint sub-brackets use the analytic constraint gradients
    (0, 2v) and (v, x).  ``drop_correction`` disables the correction term;
    it exists only for mutation testing of the verification campaigns.
    """
    fx, fv = ambient_gradient(f, z, h)
    gx, gv = ambient_gradient(g, z, h)
    x = z.Q
    v = z.v
    ambient = float(fx @ gv - fv @ gx)
    if drop_correction:
        return BracketSample(z, ambient, ambient, h)
    f_c1 = 2.0 * float(fx @ v)
    c2_g = float(gv @ v - gx @ x)
    f_c2 = float(fx @ x - fv @ v)
    c1_g = -2.0 * float(gx @ v)
    dirac = ambient - 0.5 * (f_c1 * c2_g - f_c2 * c1_g)
    return BracketSample(z, ambient, dirac, h)


def tangent_basis(z):
    """Euclidean-orthonormal basis of the tangent space of the constraint
    manifold at z, built by projecting the ambient standard basis against the
    two constraint normals and orthonormalising.  Deterministic given z."""
    n = z.dimension
    dim = 2 * n
    normals = np.zeros((2, dim))
    normals[0, n:] = 2.0 * z.v
    normals[1, :n] = z.v
    normals[1, n:] = z.Q
    frame = []
    for u in normals:
        w = u.copy()
        for b in frame:
            w -= (w @ b) * b
        w /= np.sqrt(w @ w)
        frame.append(w)
    basis = []
    for k in range(dim):
        w = np.zeros(dim)
        w[k] = 1.0
        for b in frame:
            w -= (w @ b) * b
        for b in basis:
            w -= (w @ b) * b
        nw = float(np.sqrt(w @ w))
        if nw > 1e-6:
            basis.append(w / nw)
        if len(basis) == dim - 2:
            break
    if len(basis) != dim - 2:
        raise RuntimeError("tangent basis construction lost rank")
    return [TangentVector(w[:n].copy(), w[n:].copy()) for w in basis]


def omega_form(xi, eta):
    """The canonical two-form sum_i dx^i ^ dv^i on a pair of tangent vectors."""
    return float(xi.xi_x @ eta.xi_v - xi.xi_v @ eta.xi_x)


def coordinate_x(i):
    return PhaseFunction(lambda x, v: float(x[i]), f"x[{i}]")


def coordinate_v(i):
    return PhaseFunction(lambda x, v: float(v[i]), f"v[{i}]")


def speed_constraint():
    """|v|^2 - 1, the first constraint cutting out the space of lines."""
    return PhaseFunction(lambda x, v: float(v @ v - 1.0), "speed_constraint")


def foot_constraint():
    """<x, v>, the second constraint."""
    return PhaseFunction(lambda x, v: float(x @ v), "foot_constraint")
