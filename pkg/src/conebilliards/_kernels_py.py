"""Pure-Python kernel backend: implicit cone evaluation, ray intersection,
reflection, and trajectory tracing.

`_speedups.pyx` is a statement-by-statement port of this module; the two
backends must stay bit-identical, so any edit here has to be mirrored there
with the same arithmetic order.

Cone encoding (``geo``, a float64 array):

  geo[0]  variant: 0 = quadric cross-section, 1 = radial (Fourier) cross-section
  geo[1]  ambient dimension n
  geo[2]  apex cutoff (minimum admissible n-th coordinate of a hit)
  geo[3]  transversality cutoff
  geo[4]  surface tolerance for accepted hits
  quadric: geo[5+i] = 1/axes[i]**2 for i = 0..n-2
  radial:  geo[5] = number of harmonics K, geo[6] = safe radial minimum,
           geo[7] = safe radial maximum, geo[8] = constant term,
           geo[9+k] / geo[9+K+k] = cos/sin coefficient of harmonic k+1

Hit record j: ``s[j]`` line parameter, ``q[j]`` point, ``nrm[j]`` unit
normal, ``misc[j] = (gdot, tmargin, gradnorm)`` where gdot is the
unnormalised directional derivative of the implicit function along the line.
"""

from math import atan2, cos, fabs, inf, sin, sqrt

from ._status import (
    APEX,
    DOMAIN,
    ESCAPED,
    INTERNAL,
    MAX_REFLECTIONS,
    OK,
    OUTSIDE,
    TANGENT,
)

BACKEND = "python"

# Bracketing grid: initial interval count, then doubled until the crossing
# count is unchanged twice in a row (or the level cap is reached).
GRID0 = 256
MAX_LEVELS = 8


def _radial_r(geo, phi):
    kh = int(geo[5])
    r = geo[8]
    for k in range(kh):
        w = (k + 1.0) * phi
        r += geo[9 + k] * cos(w) + geo[9 + kh + k] * sin(w)
    return r


def _radial_r_rp(geo, phi):
    kh = int(geo[5])
    r = geo[8]
    rp = 0.0
    for k in range(kh):
        kk = k + 1.0
        w = kk * phi
        c = cos(w)
        s = sin(w)
        a = geo[9 + k]
        b = geo[9 + kh + k]
        r += a * c + b * s
        rp += kk * (b * c - a * s)
    return r, rp


def implicit_value(geo, x):
    n = int(geo[1])
    if geo[0] == 0.0:
        acc = 0.0
        for i in range(n - 1):
            acc += x[i] * x[i] * geo[5 + i]
        return acc - x[n - 1] * x[n - 1]
    rho = sqrt(x[0] * x[0] + x[1] * x[1])
    return rho - x[2] * _radial_r(geo, atan2(x[1], x[0]))


def implicit_gradient(geo, x, out):
    n = int(geo[1])
    if geo[0] == 0.0:
        for i in range(n - 1):
            out[i] = 2.0 * x[i] * geo[5 + i]
        out[n - 1] = -2.0 * x[n - 1]
        return OK
    rho2 = x[0] * x[0] + x[1] * x[1]
    if rho2 <= 0.0:
        return DOMAIN
    rho = sqrt(rho2)
    r, rp = _radial_r_rp(geo, atan2(x[1], x[0]))
    inv = 1.0 / rho
    t = x[2] * rp / rho2
    out[0] = x[0] * inv + t * x[1]
    out[1] = x[1] * inv - t * x[0]
    out[2] = -r
    return OK


def _line_value(geo, v, p, n, s, xbuf):
    for i in range(n):
        xbuf[i] = p[i] + s * v[i]
    return implicit_value(geo, xbuf)


def _quadric_root_params(geo, n, v, p):
    """Real roots of the quadratic F(p + s v) = 0; returns (count, s0, s1)."""
    a = 0.0
    b = 0.0
    c = 0.0
    for i in range(n - 1):
        w = geo[5 + i]
        a += v[i] * v[i] * w
        b += p[i] * v[i] * w
        c += p[i] * p[i] * w
    vn = v[n - 1]
    pn = p[n - 1]
    sa = a + vn * vn
    a -= vn * vn
    b = 2.0 * (b - pn * vn)
    c -= pn * pn
    if fabs(a) > 1e-14 * sa:
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return 0, 0.0, 0.0
        sq = sqrt(disc)
        if b >= 0.0:
            qq = -0.5 * (b + sq)
        else:
            qq = -0.5 * (b - sq)
        if qq == 0.0:
            # b == 0 and disc == 0: double root at the foot point
            return 1, 0.0, 0.0
        return 2, qq / a, c / qq
    # direction parallel to a ruling of the asymptotic quadric
    if fabs(b) > 0.0:
        return 1, -c / b, 0.0
    return 0, 0.0, 0.0


def _finish_hit(geo, v, p, n, s, eps_trans, tol_surface, scale, j,
                hs, hq, hn, hm, xbuf, gbuf):
    """Polish one root with a Newton step and fill hit record j."""
    f = _line_value(geo, v, p, n, s, xbuf)
    st = implicit_gradient(geo, xbuf, gbuf)
    if st != OK:
        return TANGENT
    fp = 0.0
    for i in range(n):
        fp += v[i] * gbuf[i]
    if fp != 0.0:
        s = s - f / fp
    f = _line_value(geo, v, p, n, s, xbuf)
    st = implicit_gradient(geo, xbuf, gbuf)
    if st != OK:
        return TANGENT
    gn2 = 0.0
    gdot = 0.0
    for i in range(n):
        gn2 += gbuf[i] * gbuf[i]
        gdot += v[i] * gbuf[i]
    gn = sqrt(gn2)
    if gn < 1e-10:
        return TANGENT
    tmargin = fabs(gdot) / gn
    if tmargin < eps_trans:
        return TANGENT
    if fabs(f) > tol_surface * scale:
        return INTERNAL
    hs[j] = s
    for i in range(n):
        hq[j][i] = xbuf[i]
        hn[j][i] = gbuf[i] / gn
    hm[j][0] = gdot
    hm[j][1] = tmargin
    hm[j][2] = gn
    return OK


def _quadric_hits(geo, v, p, hs, hq, hn, hm):
    n = int(geo[1])
    eps_apex = geo[2]
    eps_trans = geo[3]
    tol_surface = geo[4]
    xbuf = [0.0] * n
    gbuf = [0.0] * n

    k, s0, s1 = _quadric_root_params(geo, n, v, p)
    if k == 2 and s1 < s0:
        s0, s1 = s1, s0

    pn2 = 0.0
    for i in range(n):
        pn2 += p[i] * p[i]
    pnorm = sqrt(pn2)
    smax = 1e12 * (1.0 + pnorm)
    # degree-2 variant: the rounding floor of F grows with the square of the
    # evaluation point, so the surface-tolerance guard must as well
    scale = 1.0 + pnorm + fabs(s0) + fabs(s1)
    scale = scale * scale

    nh = 0
    for idx in range(k):
        s = s0 if idx == 0 else s1
        if fabs(s) > smax:
            continue
        xn = p[n - 1] + s * v[n - 1]
        if xn <= -eps_apex:
            continue  # mirror nappe
        if xn < eps_apex:
            return APEX, 0
        st = _finish_hit(geo, v, p, n, s, eps_trans, tol_surface, scale, nh,
                         hs, hq, hn, hm, xbuf, gbuf)
        if st != OK:
            return st, 0
        nh += 1
    if nh == 2 and not (hm[0][0] < 0.0 and hm[1][0] > 0.0):
        return TANGENT, 0
    return OK, nh


def _interval_intersect(alo, ahi, blo, bhi):
    lo = alo if alo > blo else blo
    hi = ahi if ahi < bhi else bhi
    return lo, hi


def _circular_cone_window(q0, q1, q2, v0, v1, v2, r2, want_leq):
    """Solve rho^2 - r2*x3^2 {<= or >=} 0 along the line; returns up to two
    intervals as (count, lo0, hi0, lo1, hi1)."""
    a = (v0 * v0 + v1 * v1) - r2 * v2 * v2
    b = 2.0 * ((q0 * v0 + q1 * v1) - r2 * q2 * v2)
    c = (q0 * q0 + q1 * q1) - r2 * q2 * q2
    sa = (v0 * v0 + v1 * v1) + r2 * v2 * v2
    if fabs(a) > 1e-14 * sa:
        disc = b * b - 4.0 * a * c
        if disc <= 0.0:
            inside_everywhere = a < 0.0
            if want_leq == inside_everywhere:
                return 1, -inf, inf, 0.0, 0.0
            return 0, 0.0, 0.0, 0.0, 0.0
        sq = sqrt(disc)
        if b >= 0.0:
            qq = -0.5 * (b + sq)
        else:
            qq = -0.5 * (b - sq)
        r0 = qq / a
        r1 = c / qq
        if r1 < r0:
            r0, r1 = r1, r0
        if (a > 0.0) == want_leq:
            return 1, r0, r1, 0.0, 0.0
        return 2, -inf, r0, r1, inf
    if fabs(b) > 0.0:
        s0 = -c / b
        if (b > 0.0) == want_leq:
            return 1, -inf, s0, 0.0, 0.0
        return 1, s0, inf, 0.0, 0.0
    if want_leq == (c <= 0.0):
        return 1, -inf, inf, 0.0, 0.0
    return 0, 0.0, 0.0, 0.0, 0.0


def _refine_bracket(geo, v, p, n, sa, fa, sb, fb, xbuf, gbuf):
    """Bisection then safeguarded Newton for a simple sign-change bracket."""
    for _ in range(12):
        sm = 0.5 * (sa + sb)
        fm = _line_value(geo, v, p, n, sm, xbuf)
        if (fm > 0.0) == (fa > 0.0):
            sa = sm
            fa = fm
        else:
            sb = sm
            fb = fm
    s = 0.5 * (sa + sb)
    f = _line_value(geo, v, p, n, s, xbuf)
    for _ in range(60):
        if f == 0.0:
            break
        implicit_gradient(geo, xbuf, gbuf)
        fp = 0.0
        for i in range(n):
            fp += v[i] * gbuf[i]
        if fp != 0.0:
            snew = s - f / fp
        else:
            snew = 0.5 * (sa + sb)
        if snew <= sa or snew >= sb:
            snew = 0.5 * (sa + sb)
        if snew == s:
            break
        fnew = _line_value(geo, v, p, n, snew, xbuf)
        if (fnew > 0.0) == (fa > 0.0):
            sa = snew
            fa = fnew
        else:
            sb = snew
            fb = fnew
        converged = fabs(snew - s) <= 4e-16 * (1.0 + fabs(snew))
        s = snew
        f = fnew
        if converged:
            break
    return s


def _scan_window(geo, dirv, base, lo, hi, scale, br):
    """Bracket sign changes of t -> F(base + t*dirv) on the bounded window
    [lo, hi], writing up to two bracket pairs into ``br`` (flattened).

    Grid doubling stops when the crossing count is unchanged twice in a row.
    When no crossing is found, the grid minimum is refined by ternary search:
    a thin chord hides both of its crossings inside one cell, and a positive
    minimum within ``1e-9 * scale`` of zero is reported as grazing contact.

    Returns (status, bracket_count, value_at_lo, value_at_hi).
    """
    n = 3
    xbuf = [0.0] * n
    ngrid = GRID0
    step = (hi - lo) / ngrid
    vals = [0.0] * (ngrid + 1)
    for i in range(ngrid + 1):
        vals[i] = _line_value(geo, dirv, base, n, lo + i * step, xbuf)
    prev_count = -1
    stable = 0
    for level in range(MAX_LEVELS + 1):
        count = 0
        for i in range(ngrid):
            if (vals[i] > 0.0) != (vals[i + 1] > 0.0):
                count += 1
        if count == prev_count:
            stable += 1
            if stable >= 2:
                break
        else:
            stable = 0
        prev_count = count
        if level == MAX_LEVELS:
            break
        old = vals
        ngrid *= 2
        step = (hi - lo) / ngrid
        vals = [0.0] * (ngrid + 1)
        for i in range(0, ngrid + 1, 2):
            vals[i] = old[i // 2]
        for i in range(1, ngrid, 2):
            vals[i] = _line_value(geo, dirv, base, n, lo + i * step, xbuf)

    count = 0
    for i in range(ngrid):
        if (vals[i] > 0.0) != (vals[i + 1] > 0.0):
            count += 1
    if count > 2:
        return TANGENT, 0, vals[0], vals[ngrid]

    nbr = 0
    if count == 0:
        imin = 0
        fmin = vals[0]
        for i in range(1, ngrid + 1):
            if vals[i] < fmin:
                fmin = vals[i]
                imin = i
        if fmin > 0.0:
            ia = imin - 1 if imin > 0 else 0
            ib = imin + 1 if imin < ngrid else ngrid
            cell_a = lo + ia * step
            cell_b = lo + ib * step
            sa = cell_a
            sb = cell_b
            for _ in range(90):
                s1t = sa + (sb - sa) / 3.0
                s2t = sb - (sb - sa) / 3.0
                f1t = _line_value(geo, dirv, base, n, s1t, xbuf)
                f2t = _line_value(geo, dirv, base, n, s2t, xbuf)
                if f1t < f2t:
                    sb = s2t
                else:
                    sa = s1t
            smid = 0.5 * (sa + sb)
            fmid = _line_value(geo, dirv, base, n, smid, xbuf)
            if fmid < 0.0:
                br[0] = cell_a
                br[1] = smid
                br[2] = smid
                br[3] = cell_b
                nbr = 2
            elif fmid <= 1e-9 * scale:
                return TANGENT, 0, vals[0], vals[ngrid]
    else:
        for i in range(ngrid):
            if (vals[i] > 0.0) != (vals[i + 1] > 0.0):
                br[2 * nbr] = lo + i * step
                br[2 * nbr + 1] = lo + (i + 1) * step
                nbr += 1
    return OK, nbr, vals[0], vals[ngrid]


def _scan_roots(geo, dirv, base, lo, hi, scale, roots, nroots):
    """Scan a window and refine its brackets; append the refined parameters
    to ``roots``.  Returns (status, new_root_count, value_lo, value_hi)."""
    n = 3
    xbuf = [0.0] * n
    gbuf = [0.0] * n
    br = [0.0] * 4
    st, nbr, vlo, vhi = _scan_window(geo, dirv, base, lo, hi, scale, br)
    if st != OK:
        return st, nroots, vlo, vhi
    for j in range(nbr):
        sa = br[2 * j]
        sb = br[2 * j + 1]
        fa = _line_value(geo, dirv, base, n, sa, xbuf)
        fb = _line_value(geo, dirv, base, n, sb, xbuf)
        roots[nroots] = _refine_bracket(geo, dirv, base, n, sa, fa, sb, fb, xbuf, gbuf)
        nroots += 1
    return OK, nroots, vlo, vhi


def _radial_hits(geo, v, p, hs, hq, hn, hm):
    n = 3
    eps_apex = geo[2]
    eps_trans = geo[3]
    tol_surface = geo[4]
    rmin = geo[6]
    rmax = geo[7]
    xbuf = [0.0] * n
    gbuf = [0.0] * n

    q0 = p[0]
    q1 = p[1]
    q2 = p[2]
    v0 = v[0]
    v1 = v[1]
    v2 = v[2]

    # Window: inside the padded outer circular cone and above the apex cutoff.
    # Every surface point sits between the inner and outer circular cones, so
    # all roots live in this window.
    rmax_w = rmax * (1.0 + 1e-9)
    cnt, w0lo, w0hi, w1lo, w1hi = _circular_cone_window(
        q0, q1, q2, v0, v1, v2, rmax_w * rmax_w, True)
    if cnt == 0:
        return OK, 0
    apex_lo = -inf
    apex_hi = inf
    if v2 > 0.0:
        apex_lo = (eps_apex - q2) / v2
    elif v2 < 0.0:
        apex_hi = (eps_apex - q2) / v2
    elif q2 < eps_apex:
        return OK, 0

    lo, hi = _interval_intersect(w0lo, w0hi, apex_lo, apex_hi)
    if cnt == 2:
        lo1, hi1 = _interval_intersect(w1lo, w1hi, apex_lo, apex_hi)
        if lo > hi:
            lo, hi = lo1, hi1
        elif lo1 <= hi1:
            # Convexity forbids two admissible pieces; a roundoff sliver can
            # briefly produce them, in which case the hull is a safe window.
            if lo1 < lo:
                lo = lo1
            if hi1 > hi:
                hi = hi1
    if lo > hi:
        return OK, 0

    # Tighten with the inner circular cone: surface points satisfy
    # rho >= r_min * x3, so roots lie where the inner-cone quadratic is >= 0.
    rmin_w = rmin * (1.0 - 1e-9)
    am = (v0 * v0 + v1 * v1) - rmin_w * rmin_w * v2 * v2
    if am < 0.0:
        bm = 2.0 * ((q0 * v0 + q1 * v1) - rmin_w * rmin_w * q2 * v2)
        cm = (q0 * q0 + q1 * q1) - rmin_w * rmin_w * q2 * q2
        discm = bm * bm - 4.0 * am * cm
        if discm <= 0.0:
            return OK, 0  # entire line strictly inside the inner cone
        sqm = sqrt(discm)
        if bm >= 0.0:
            qqm = -0.5 * (bm + sqm)
        else:
            qqm = -0.5 * (bm - sqm)
        m0 = qqm / am
        m1 = cm / qqm
        if m1 < m0:
            m0, m1 = m1, m0
        lo, hi = _interval_intersect(lo, hi, m0, m1)
        if lo > hi:
            return OK, 0

    pnorm = sqrt(q0 * q0 + q1 * q1 + q2 * q2)
    qnorm = pnorm

    # Split the search: |s| <= s_split on the line itself; |s| > s_split via
    # the degree-1 homogeneity F(p + s v) = s F(v + p/s) for s > 0 (and the
    # mirrored form for s < 0), which turns the far range into the bounded
    # auxiliary windows u = 1/|s| in (0, 1/s_split].
    s_split = 4.0 * (1.0 + pnorm)
    u_eps = 1e-12 / s_split

    roots = [0.0] * 6
    nroots = 0

    near_lo = lo if lo > -s_split else -s_split
    near_hi = hi if hi < s_split else s_split
    if near_lo <= near_hi:
        scale = 1.0 + pnorm + s_split
        st, nroots, vlo, vhi = _scan_roots(geo, v, p, near_lo, near_hi, scale,
                                           roots, nroots)
        if st != OK:
            return st, 0
        # A window end created by the apex cutoff that is already inside the
        # cone means the chord continues below the cutoff.
        if v2 > 0.0 and near_lo == apex_lo and vlo < 0.0:
            return APEX, 0
        if v2 < 0.0 and near_hi == apex_hi and vhi < 0.0:
            return APEX, 0

    if hi > s_split:
        aux = [v0, v1, v2]
        scale = 2.0 + qnorm / s_split
        st, nnew, vlo, vhi = _scan_roots(geo, p, aux, u_eps, 1.0 / s_split, scale,
                                         roots, nroots)
        if st != OK:
            return st, 0
        for j in range(nroots, nnew):
            roots[j] = 1.0 / roots[j]
        nroots = nnew
    if lo < -s_split:
        aux = [-v0, -v1, -v2]
        scale = 2.0 + qnorm / s_split
        st, nnew, vlo, vhi = _scan_roots(geo, p, aux, u_eps, 1.0 / s_split, scale,
                                         roots, nroots)
        if st != OK:
            return st, 0
        for j in range(nroots, nnew):
            roots[j] = -1.0 / roots[j]
        nroots = nnew

    # Sort ascending and drop duplicates from overlapping window edges.
    for i in range(1, nroots):
        key = roots[i]
        j = i - 1
        while j >= 0 and roots[j] > key:
            roots[j + 1] = roots[j]
            j -= 1
        roots[j + 1] = key
    uniq = 0
    for i in range(nroots):
        if uniq > 0 and fabs(roots[i] - roots[uniq - 1]) <= 1e-9 * (1.0 + fabs(roots[i])):
            continue
        roots[uniq] = roots[i]
        uniq += 1
    nroots = uniq
    if nroots > 2:
        return TANGENT, 0

    nh = 0
    for j in range(nroots):
        s = roots[j]
        xn = q2 + s * v2
        if xn < eps_apex * (1.0 + 1e-12):
            return APEX, 0
        scale = 1.0 + pnorm + fabs(s)
        st = _finish_hit(geo, v, p, n, s, eps_trans, tol_surface, scale, nh,
                         hs, hq, hn, hm, xbuf, gbuf)
        if st != OK:
            return st, 0
        nh += 1
    if nh == 2:
        if hs[1] < hs[0]:
            hs[0], hs[1] = hs[1], hs[0]
            hq[0], hq[1] = hq[1], hq[0]
            hn[0], hn[1] = hn[1], hn[0]
            hm[0], hm[1] = hm[1], hm[0]
        if not (hm[0][0] < 0.0 and hm[1][0] > 0.0):
            return TANGENT, 0
    return OK, nh


def _hits(geo, v, p, hs, hq, hn, hm):
    if geo[0] == 0.0:
        return _quadric_hits(geo, v, p, hs, hq, hn, hm)
    return _radial_hits(geo, v, p, hs, hq, hn, hm)


def intersections(geo, v, p, out_s, out_q, out_nrm, out_misc):
    """All transversal hits of the line {p + s v} with the cone, sorted by s.

    ``out_s`` has shape (2,), ``out_q``/``out_nrm`` shape (2, n) and
    ``out_misc`` shape (2, 3).  Returns (status, hit_count); buffers are only
    meaningful on an OK status.
    """
    n = int(geo[1])
    hs = [0.0, 0.0]
    hq = [[0.0] * n, [0.0] * n]
    hn = [[0.0] * n, [0.0] * n]
    hm = [[0.0] * 3, [0.0] * 3]
    st, nh = _hits(geo, v, p, hs, hq, hn, hm)
    for j in range(nh):
        out_s[j] = hs[j]
        for i in range(n):
            out_q[j, i] = hq[j][i]
            out_nrm[j, i] = hn[j][i]
        for i in range(3):
            out_misc[j, i] = hm[j][i]
    return st, nh


def reflect_step(geo, v, p, out_v2, out_q2, out_hit, out_scal):
    """Reflect the line at its exit point.

    On OK fills the outgoing direction/foot point, the reflection point and
    ``out_scal = (s, alpha, tmargin, gradnorm)``.  Returns ESCAPED when the
    line has no exit hit and OUTSIDE when it misses the cone entirely.
    """
    n = int(geo[1])
    hs = [0.0, 0.0]
    hq = [[0.0] * n, [0.0] * n]
    hn = [[0.0] * n, [0.0] * n]
    hm = [[0.0] * 3, [0.0] * 3]
    st, nh = _hits(geo, v, p, hs, hq, hn, hm)
    if st != OK:
        return st
    if nh == 0:
        return OUTSIDE
    idx = -1
    for j in range(nh):
        if hm[j][0] > 0.0:
            idx = j
            break
    if idx < 0:
        return ESCAPED
    gn = hm[idx][2]
    cc = hm[idx][0] / gn
    nrm = hn[idx]
    hit = hq[idx]
    vn2 = 0.0
    for i in range(n):
        out_v2[i] = v[i] - 2.0 * cc * nrm[i]
        vn2 += out_v2[i] * out_v2[i]
    vnorm = sqrt(vn2)
    qd = 0.0
    for i in range(n):
        out_v2[i] = out_v2[i] / vnorm
        out_hit[i] = hit[i]
        qd += hit[i] * out_v2[i]
    for i in range(n):
        out_q2[i] = hit[i] - qd * out_v2[i]
    # second projection pass: one pass leaves <Q,v> ~ (q.v)*eps for far hits
    qd = 0.0
    for i in range(n):
        qd += out_q2[i] * out_v2[i]
    for i in range(n):
        out_q2[i] = out_q2[i] - qd * out_v2[i]
    out_scal[0] = hs[idx]
    out_scal[1] = 2.0 * cc / gn
    out_scal[2] = hm[idx][1]
    out_scal[3] = gn
    return OK


def trace_terminal(geo, v, p, max_m, out_v, out_q, out_info):
    """Run the billiard to escape; fills the terminal line, the bounce count
    and the minimum transversality margin over all reflections."""
    n = int(geo[1])
    cur_v = [0.0] * n
    cur_p = [0.0] * n
    for i in range(n):
        cur_v[i] = v[i]
        cur_p[i] = p[i]
    tmp_v = [0.0] * n
    tmp_q = [0.0] * n
    tmp_hit = [0.0] * n
    tmp_scal = [0.0] * 4
    m = 0
    minmarg = inf
    while True:
        st = reflect_step(geo, cur_v, cur_p, tmp_v, tmp_q, tmp_hit, tmp_scal)
        if st == ESCAPED:
            for i in range(n):
                out_v[i] = cur_v[i]
                out_q[i] = cur_p[i]
            out_info[0] = float(m)
            out_info[1] = minmarg
            return OK
        if st == OUTSIDE:
            # losing the guaranteed re-entry root mid-trace only happens for
            # grazing contact beyond grid resolution
            return OUTSIDE if m == 0 else TANGENT
        if st != OK:
            return st
        if m >= max_m:
            return MAX_REFLECTIONS
        m += 1
        if tmp_scal[2] < minmarg:
            minmarg = tmp_scal[2]
        for i in range(n):
            cur_v[i] = tmp_v[i]
            cur_p[i] = tmp_q[i]
