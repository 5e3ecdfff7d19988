"""The billiard map inside the cone, trajectory tracing, the lift of
escape-data functions to first integrals, and the spherical-caustic integral.

Convention: the reflection point of a line is its *exit* hit -- the forward
boundary crossing where the particle, travelling inside the solid cone, meets
the wall.  Lines whose forward ray stays inside the cone escape to infinity
and are fixed by the extended map.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from . import _status, kernels
from .errors import (
    ApexError,
    MaxReflectionsExceeded,
    NotReflectable,
    TangencyError,
    TraceInternalError,
)
from .geometry import Crossing, SurfaceHit, implicit_gradient, implicit_hessian
from .phase import OrientedLine, retract
from .symplectic import PhaseFunction

DEFAULT_MAX_REFLECTIONS = 10_000
_LIFT_CACHE_CAP = 200_000


@dataclass(frozen=True)
class ReflectionEvent:
    """One reflection: incoming line, surface hit, outgoing line and the
    coefficient alpha in v_in - v_out = alpha * grad F(q)."""

    incoming: OrientedLine
    hit: SurfaceHit
    outgoing: OrientedLine
    alpha: float


@dataclass(frozen=True)
class Trajectory:
    initial: OrientedLine
    events: tuple
    terminal: OrientedLine

    @property
    def m(self):
        return len(self.events)

    def lines(self):
        """All lines along the trajectory: initial, then each outgoing."""
        return [self.initial] + [ev.outgoing for ev in self.events]


def _step(cone, line):
    """One kernel reflection step; returns (status, event_or_None)."""
    n = cone.dimension
    out_v = np.empty(n)
    out_q = np.empty(n)
    out_hit = np.empty(n)
    out_scal = np.empty(4)
    st = kernels.reflect_step(cone.packed, line.v, line.Q, out_v, out_q, out_hit, out_scal)
    if st != _status.OK:
        return st, None
    grad = implicit_gradient(cone, out_hit)
    normal = grad / out_scal[3]
    hit = SurfaceHit(
        s=float(out_scal[0]),
        q=out_hit,
        unit_normal=normal,
        crossing=Crossing.EXITING,
        transversality=float(out_scal[2]),
    )
    outgoing = OrientedLine(out_v, out_q)
    return _status.OK, ReflectionEvent(line, hit, outgoing, float(out_scal[1]))


def _raise_for(st, context):
    if st == _status.TANGENT:
        raise TangencyError(f"{context}: reflection point below the transversality margin")
    if st == _status.APEX:
        raise ApexError(f"{context}: trajectory reaches the apex cutoff")
    raise TraceInternalError(f"{context}: kernel status {_status.NAMES[st]}")


def reflect(cone, line):
    """Reflect the oriented line at its exit point on the cone.

    Raises :class:`NotReflectable` for escaping lines and lines missing the
    cone, :class:`TangencyError`/:class:`ApexError` near the singular sets.
    """
    st, event = _step(cone, line)
    if st == _status.OK:
        return event
    if st == _status.ESCAPED:
        raise NotReflectable("line escapes to infinity inside the cone; no exit point")
    if st == _status.OUTSIDE:
        raise NotReflectable("line does not meet the cone")
    _raise_for(st, "reflect")


def extended_map(cone, line):
    """The billiard map extended by the identity on escaping lines.

    Escaping lines are returned as the same object (bit-identical); chords and
    inbound lines are reflected at their exit point.
    """
    st, event = _step(cone, line)
    if st == _status.OK:
        return event.outgoing
    if st == _status.ESCAPED:
        return line
    if st == _status.OUTSIDE:
        raise NotReflectable("line does not meet the cone")
    _raise_for(st, "extended_map")


def trace(cone, line, max_reflections=DEFAULT_MAX_REFLECTIONS):
    """Iterate the billiard map until the line escapes.

    Exhausting ``max_reflections`` raises :class:`MaxReflectionsExceeded`
    carrying the partial trajectory; this signals either a numerical
    pathology or a genuinely long bounce sequence and is never swallowed.
    """
    events = []
    current = line
    while True:
        st, event = _step(cone, current)
        if st == _status.ESCAPED:
            return Trajectory(line, tuple(events), current)
        if st == _status.OUTSIDE:
            if not events:
                raise NotReflectable("initial line does not meet the cone")
            raise TangencyError("grazing contact beyond intersection resolution")
        if st != _status.OK:
            _raise_for(st, f"trace (bounce {len(events)})")
        if len(events) >= max_reflections:
            raise MaxReflectionsExceeded(
                f"no escape within {max_reflections} reflections",
                partial=Trajectory(line, tuple(events), current),
            )
        events.append(event)
        current = event.outgoing


def trace_info(cone, line, max_reflections=DEFAULT_MAX_REFLECTIONS):
    """Fast terminal-only trace: (terminal line, m, min transversality margin).

    Same arithmetic as :func:`trace`, without building the event list.
    """
    n = cone.dimension
    out_v = np.empty(n)
    out_q = np.empty(n)
    out_info = np.empty(2)
    st = kernels.trace_terminal(cone.packed, line.v, line.Q, max_reflections,
                                out_v, out_q, out_info)
    if st == _status.OK:
        return OrientedLine(out_v, out_q), int(out_info[0]), float(out_info[1])
    if st == _status.OUTSIDE:
        raise NotReflectable("initial line does not meet the cone")
    if st == _status.MAX_REFLECTIONS:
        raise MaxReflectionsExceeded(f"no escape within {max_reflections} reflections")
    _raise_for(st, "trace")


def bounce_jacobian(cone, event):
    """Exact Jacobian of one reflection as a linear map on (x, v) pairs,
    obtained by implicit differentiation of the exit root and the reflection
    formulas.  Valid wherever the bounce is transversal."""
    n = cone.dimension
    v = event.incoming.v
    q = event.hit.q
    s = event.hit.s
    vp = event.outgoing.v
    g = implicit_gradient(cone, q)
    hess = implicit_hessian(cone, q)
    gn = float(np.sqrt(g @ g))
    nh = g / gn
    denom = float(g @ v)
    eye = np.eye(n)
    zero = np.zeros((n, n))
    dQ = np.hstack([eye, zero])
    dv = np.hstack([zero, eye])
    ds = -(g @ dQ + s * (g @ dv)) / denom
    dq = dQ + np.outer(v, ds) + s * dv
    dg = hess @ dq
    dnh = (dg - np.outer(nh, nh @ dg)) / gn
    c = float(v @ nh)
    dc = nh @ dv + v @ dnh
    dw = dv - 2.0 * (np.outer(nh, dc) + c * dnh)
    dvp = dw - np.outer(vp, vp @ dw)
    dQp = dq - np.outer(vp, vp @ dq + q @ dvp) - float(q @ vp) * dvp
    return np.vstack([dQp, dvp])


def retraction_jacobian(z):
    """Jacobian of the retraction onto the space of lines, evaluated at a
    point already on it."""
    n = z.dimension
    v = z.v
    x = z.Q
    proj = np.eye(n) - np.outer(v, v)
    top = np.hstack([proj, -np.outer(v, x)])
    bot = np.hstack([np.zeros((n, n)), proj])
    return np.vstack([top, bot])


def trace_jacobian(cone, line, max_reflections=DEFAULT_MAX_REFLECTIONS):
    """Trace to escape and return (trajectory, J) where J is the exact
    Jacobian of ambient (x, v) -> terminal (x, v), retraction included."""
    traj = trace(cone, line, max_reflections)
    jac = retraction_jacobian(line)
    for event in traj.events:
        jac = bounce_jacobian(cone, event) @ jac
    return traj, jac


class _TraceOracle:
    """Shared, memoised access to terminal data and tangent maps of traces
    starting from ambient (x, v) pairs.  Memoisation is keyed on bit-identical
    inputs and cannot change results."""

    def __init__(self, cone, margin, max_reflections):
        self.cone = cone
        self.margin = margin
        self.max_reflections = max_reflections
        self._terminals = {}
        self._jacobians = {}

    def terminal(self, x, v):
        key = (x.tobytes(), v.tobytes())
        got = self._terminals.get(key)
        if got is None:
            line = retract(x, v)
            terminal, m, minmarg = trace_info(self.cone, line, self.max_reflections)
            if len(self._terminals) >= _LIFT_CACHE_CAP:
                self._terminals.clear()
            got = (terminal, m, minmarg >= self.margin)
            self._terminals[key] = got
        return got

    def jacobian(self, x, v):
        key = (x.tobytes(), v.tobytes())
        got = self._jacobians.get(key)
        if got is None:
            line = retract(x, v)
            traj, jac = trace_jacobian(self.cone, line, self.max_reflections)
            if len(self._jacobians) >= _LIFT_CACHE_CAP:
                self._jacobians.clear()
            got = (traj.terminal, jac)
            self._jacobians[key] = got
        return got


def lift(cone, f, margin=0.0, max_reflections=DEFAULT_MAX_REFLECTIONS, _oracle=None):
    """Lift a function on escaping lines to a first integral of the billiard.

    The lifted evaluator retracts its ambient argument onto the space of
    lines, traces to escape and evaluates ``f`` on the terminal line.  Its
    smoothness probe reports (ok, m) so finite-difference stencils can detect
    discontinuity crossings by m-disagreement; ``margin`` additionally rejects
    evaluations whose trajectory reflects below that transversality margin.

    When ``f`` carries an exact gradient, the lift does too: the trajectory's
    tangent map (chain rule through every reflection) composed with the
    gradient of ``f`` at the terminal line.
    """
    oracle = _oracle if _oracle is not None else _TraceOracle(cone, margin, max_reflections)

    def evaluator(x, v):
        terminal, _, _ = oracle.terminal(x, v)
        return f.evaluator(terminal.Q, terminal.v)

    def probe(x, v):
        # Any failed trace marks the point as outside the smooth domain; the
        # evaluator itself propagates the underlying error.
        try:
            _, m, ok = oracle.terminal(x, v)
        except (TangencyError, ApexError, NotReflectable, MaxReflectionsExceeded):
            return False, None
        return ok, m

    gradient = None
    if f.gradient is not None:
        n = cone.dimension

        def gradient(x, v):
            terminal, jac = oracle.jacobian(x, v)
            fx, fv = f.gradient(terminal.Q, terminal.v)
            row = np.concatenate([fx, fv]) @ jac
            return row[:n].copy(), row[n:].copy()

    return PhaseFunction(evaluator, f"lifted({f.label})", probe, gradient)


def escape_direction(i):
    """Coordinate function v[i] on escaping lines (the final direction)."""

    def gradient(x, v):
        gx = np.zeros(x.shape[0])
        gv = np.zeros(x.shape[0])
        gv[i] = 1.0
        return gx, gv

    return PhaseFunction(lambda x, v: float(v[i]), f"escape_v[{i}]", None, gradient)


def lifted_direction(cone, i, margin=0.0, max_reflections=DEFAULT_MAX_REFLECTIONS):
    """The i-th lifted final-direction component, a first integral."""
    return lift(cone, escape_direction(i), margin, max_reflections)


def lifted_directions(cone, margin=0.0, max_reflections=DEFAULT_MAX_REFLECTIONS):
    """All n lifted final-direction components, sharing one trace cache (the
    trajectory and its tangent map are computed once per base point)."""
    oracle = _TraceOracle(cone, margin, max_reflections)
    return [
        lift(cone, escape_direction(i), margin, max_reflections, _oracle=oracle)
        for i in range(cone.dimension)
    ]


def caustic_integral(z):
    """Total squared angular momentum sum_{i<j} (Q_i v_j - Q_j v_i)^2.

    Its conservation under the billiard map means spheres about the apex are
    caustics.  On the space of lines it equals |Q|^2, which is asserted.
    """
    Q = z.Q
    v = z.v
    n = Q.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            w = Q[i] * v[j] - Q[j] * v[i]
            total += w * w
    qq = float(Q @ Q)
    assert abs(total - qq) <= 1e-12 * (1.0 + qq), "caustic integral deviates from |Q|^2"
    return float(total)


def write_trajectory_csv(stream, trajectory, cone, seed=None):
    """Write one row per reflection event.

    Columns: step, the reflection point, incoming and outgoing directions,
    the line parameter of the hit, alpha, and the caustic integral of the
    incoming line.  A header line records the cone hash and seed.
    """
    n = cone.dimension
    close = False
    if isinstance(stream, (str, bytes)):
        stream = io.open(stream, "w", newline="")
        close = True
    try:
        stream.write(f"# conebilliards trajectory cone={cone.spec_hash()} seed={seed}\n")
        cols = (
            ["step"]
            + [f"q{i+1}" for i in range(n)]
            + [f"vin{i+1}" for i in range(n)]
            + [f"vout{i+1}" for i in range(n)]
            + ["s", "alpha", "I"]
        )
        stream.write(",".join(cols) + "\n")
        for step, ev in enumerate(trajectory.events):
            vals = (
                [float(x) for x in ev.hit.q]
                + [float(x) for x in ev.incoming.v]
                + [float(x) for x in ev.outgoing.v]
                + [ev.hit.s, ev.alpha, caustic_integral(ev.incoming)]
            )
            stream.write(str(step) + "," + ",".join(format(x, ".17g") for x in vals) + "\n")
    finally:
        if close:
            stream.close()
