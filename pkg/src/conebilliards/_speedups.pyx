# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

Statement-by-statement port of `_kernels_py.py`; the two must stay
bit-identical, so keep arithmetic order in sync when editing either one.
See that module for the cone encoding and buffer conventions.
"""

from libc.math cimport INFINITY, atan2, cos, fabs, sin, sqrt
from libc.stdlib cimport free, malloc

import numpy as np

BACKEND = "compiled"

# Status codes mirror conebilliards._status.
cdef enum:
    OK = 0
    TANGENT = 1
    APEX = 2
    ESCAPED = 3
    OUTSIDE = 4
    MAX_REFLECTIONS = 5
    INTERNAL = 6
    DOMAIN = 7

DEF GRID0 = 256
DEF MAX_LEVELS = 8
DEF MAXN = 16
DEF MAXGRID = 65537  # GRID0 * 2**MAX_LEVELS + 1


cdef double _radial_r(const double* geo, double phi) noexcept:
    cdef int kh = <int>geo[5]
    cdef double r = geo[8]
    cdef int k
    cdef double w
    for k in range(kh):
        w = (k + 1.0) * phi
        r += geo[9 + k] * cos(w) + geo[9 + kh + k] * sin(w)
    return r


cdef void _radial_r_rp(const double* geo, double phi, double* rout, double* rpout) noexcept:
    cdef int kh = <int>geo[5]
    cdef double r = geo[8]
    cdef double rp = 0.0
    cdef int k
    cdef double kk, w, c, s, a, b
    for k in range(kh):
        kk = k + 1.0
        w = kk * phi
        c = cos(w)
        s = sin(w)
        a = geo[9 + k]
        b = geo[9 + kh + k]
        r += a * c + b * s
        rp += kk * (b * c - a * s)
    rout[0] = r
    rpout[0] = rp


cdef double c_implicit_value(const double* geo, const double* x) noexcept:
    cdef int n = <int>geo[1]
    cdef double acc, rho
    cdef int i
    if geo[0] == 0.0:
        acc = 0.0
        for i in range(n - 1):
            acc += x[i] * x[i] * geo[5 + i]
        return acc - x[n - 1] * x[n - 1]
    rho = sqrt(x[0] * x[0] + x[1] * x[1])
    return rho - x[2] * _radial_r(geo, atan2(x[1], x[0]))


cdef int c_implicit_gradient(const double* geo, const double* x, double* out) noexcept:
    cdef int n = <int>geo[1]
    cdef int i
    cdef double rho2, rho, inv, t, r, rp
    if geo[0] == 0.0:
        for i in range(n - 1):
            out[i] = 2.0 * x[i] * geo[5 + i]
        out[n - 1] = -2.0 * x[n - 1]
        return OK
    rho2 = x[0] * x[0] + x[1] * x[1]
    if rho2 <= 0.0:
        return DOMAIN
    rho = sqrt(rho2)
    _radial_r_rp(geo, atan2(x[1], x[0]), &r, &rp)
    inv = 1.0 / rho
    t = x[2] * rp / rho2
    out[0] = x[0] * inv + t * x[1]
    out[1] = x[1] * inv - t * x[0]
    out[2] = -r
    return OK


cdef double _line_value(const double* geo, const double* v, const double* p,
                        int n, double s, double* xbuf) noexcept:
    cdef int i
    for i in range(n):
        xbuf[i] = p[i] + s * v[i]
    return c_implicit_value(geo, xbuf)


cdef int _quadric_root_params(const double* geo, int n, const double* v,
                              const double* p, double* s01) noexcept:
    cdef double a = 0.0, b = 0.0, c = 0.0
    cdef double w, vn, pn, sa, disc, sq, qq
    cdef int i
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
            return 0
        sq = sqrt(disc)
        if b >= 0.0:
            qq = -0.5 * (b + sq)
        else:
            qq = -0.5 * (b - sq)
        if qq == 0.0:
            # b == 0 and disc == 0: double root at the foot point
            s01[0] = 0.0
            return 1
        s01[0] = qq / a
        s01[1] = c / qq
        return 2
    # direction parallel to a ruling of the asymptotic quadric
    if fabs(b) > 0.0:
        s01[0] = -c / b
        return 1
    return 0


cdef int _finish_hit(const double* geo, const double* v, const double* p, int n,
                     double s, double eps_trans, double tol_surface, double scale,
                     int j, double* hs, double* hq, double* hn, double* hm,
                     double* xbuf, double* gbuf) noexcept:
    cdef double f, fp, gn2, gdot, gn, tmargin
    cdef int i, st
    f = _line_value(geo, v, p, n, s, xbuf)
    st = c_implicit_gradient(geo, xbuf, gbuf)
    if st != OK:
        return TANGENT
    fp = 0.0
    for i in range(n):
        fp += v[i] * gbuf[i]
    if fp != 0.0:
        s = s - f / fp
    f = _line_value(geo, v, p, n, s, xbuf)
    st = c_implicit_gradient(geo, xbuf, gbuf)
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
        hq[j * MAXN + i] = xbuf[i]
        hn[j * MAXN + i] = gbuf[i] / gn
    hm[j * 3 + 0] = gdot
    hm[j * 3 + 1] = tmargin
    hm[j * 3 + 2] = gn
    return OK


cdef int _quadric_hits(const double* geo, const double* v, const double* p,
                       double* hs, double* hq, double* hn, double* hm,
                       int* nh_out) noexcept:
    cdef int n = <int>geo[1]
    cdef double eps_apex = geo[2]
    cdef double eps_trans = geo[3]
    cdef double tol_surface = geo[4]
    cdef double xbuf[MAXN]
    cdef double gbuf[MAXN]
    cdef double s01[2]
    cdef double tmp, pn2, pnorm, smax, scale, s, xn
    cdef int k, i, idx, nh, st

    s01[0] = 0.0
    s01[1] = 0.0
    k = _quadric_root_params(geo, n, v, p, s01)
    if k == 2 and s01[1] < s01[0]:
        tmp = s01[0]
        s01[0] = s01[1]
        s01[1] = tmp

    pn2 = 0.0
    for i in range(n):
        pn2 += p[i] * p[i]
    pnorm = sqrt(pn2)
    smax = 1e12 * (1.0 + pnorm)
    # degree-2 variant: the rounding floor of F grows with the square of the
    # evaluation point, so the surface-tolerance guard must as well
    scale = 1.0 + pnorm + fabs(s01[0]) + fabs(s01[1])
    scale = scale * scale

    nh = 0
    for idx in range(k):
        s = s01[idx]
        if fabs(s) > smax:
            continue
        xn = p[n - 1] + s * v[n - 1]
        if xn <= -eps_apex:
            continue  # mirror nappe
        if xn < eps_apex:
            nh_out[0] = 0
            return APEX
        st = _finish_hit(geo, v, p, n, s, eps_trans, tol_surface, scale, nh,
                         hs, hq, hn, hm, xbuf, gbuf)
        if st != OK:
            nh_out[0] = 0
            return st
        nh += 1
    if nh == 2 and not (hm[0] < 0.0 and hm[3] > 0.0):
        nh_out[0] = 0
        return TANGENT
    nh_out[0] = nh
    return OK


cdef void _interval_intersect(double alo, double ahi, double blo, double bhi,
                              double* lo, double* hi) noexcept:
    lo[0] = alo if alo > blo else blo
    hi[0] = ahi if ahi < bhi else bhi


cdef int _circular_cone_window(double q0, double q1, double q2,
                               double v0, double v1, double v2,
                               double r2, bint want_leq, double* w) noexcept:
    cdef double a = (v0 * v0 + v1 * v1) - r2 * v2 * v2
    cdef double b = 2.0 * ((q0 * v0 + q1 * v1) - r2 * q2 * v2)
    cdef double c = (q0 * q0 + q1 * q1) - r2 * q2 * q2
    cdef double sa = (v0 * v0 + v1 * v1) + r2 * v2 * v2
    cdef double disc, sq, qq, r0, r1, s0
    cdef bint inside_everywhere
    if fabs(a) > 1e-14 * sa:
        disc = b * b - 4.0 * a * c
        if disc <= 0.0:
            inside_everywhere = a < 0.0
            if want_leq == inside_everywhere:
                w[0] = -INFINITY
                w[1] = INFINITY
                return 1
            return 0
        sq = sqrt(disc)
        if b >= 0.0:
            qq = -0.5 * (b + sq)
        else:
            qq = -0.5 * (b - sq)
        r0 = qq / a
        r1 = c / qq
        if r1 < r0:
            s0 = r0
            r0 = r1
            r1 = s0
        if (a > 0.0) == want_leq:
            w[0] = r0
            w[1] = r1
            return 1
        w[0] = -INFINITY
        w[1] = r0
        w[2] = r1
        w[3] = INFINITY
        return 2
    if fabs(b) > 0.0:
        s0 = -c / b
        if (b > 0.0) == want_leq:
            w[0] = -INFINITY
            w[1] = s0
            return 1
        w[0] = s0
        w[1] = INFINITY
        return 1
    if want_leq == (c <= 0.0):
        w[0] = -INFINITY
        w[1] = INFINITY
        return 1
    return 0


cdef double _refine_bracket(const double* geo, const double* v, const double* p,
                            int n, double sa, double fa, double sb, double fb,
                            double* xbuf, double* gbuf) noexcept:
    cdef double sm, fm, s, f, fp, snew, fnew
    cdef bint converged
    cdef int it, i
    for it in range(12):
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
    for it in range(60):
        if f == 0.0:
            break
        c_implicit_gradient(geo, xbuf, gbuf)
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


cdef int _scan_window(const double* geo, const double* dirv, const double* base,
                      double lo, double hi, double scale, double* br,
                      int* nbr_out, double* vlo_out, double* vhi_out) noexcept:
    # Bracket sign changes of t -> F(base + t*dirv) on the bounded window
    # [lo, hi]; see _kernels_py._scan_window for the full description.
    cdef int n = 3
    cdef double xbuf[MAXN]
    cdef double step, fmin, sa, sb, s1t, s2t, f1t, f2t, smid, fmid
    cdef double cell_a, cell_b
    cdef int ngrid, level, prev_count, count, stable, i, imin, nbr, ia, ib
    cdef double* vals

    nbr_out[0] = 0
    vals = <double*>malloc(MAXGRID * sizeof(double))
    if vals == NULL:
        return INTERNAL
    ngrid = GRID0
    step = (hi - lo) / ngrid
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
        ngrid *= 2
        step = (hi - lo) / ngrid
        for i in range(ngrid // 2, -1, -1):
            vals[2 * i] = vals[i]
        for i in range(1, ngrid, 2):
            vals[i] = _line_value(geo, dirv, base, n, lo + i * step, xbuf)

    vlo_out[0] = vals[0]
    vhi_out[0] = vals[ngrid]
    count = 0
    for i in range(ngrid):
        if (vals[i] > 0.0) != (vals[i + 1] > 0.0):
            count += 1
    if count > 2:
        free(vals)
        return TANGENT

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
            for i in range(90):
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
                free(vals)
                return TANGENT
    else:
        for i in range(ngrid):
            if (vals[i] > 0.0) != (vals[i + 1] > 0.0):
                br[2 * nbr] = lo + i * step
                br[2 * nbr + 1] = lo + (i + 1) * step
                nbr += 1
    free(vals)
    nbr_out[0] = nbr
    return OK


cdef int _scan_roots(const double* geo, const double* dirv, const double* base,
                     double lo, double hi, double scale, double* roots,
                     int* nroots, double* vlo_out, double* vhi_out) noexcept:
    cdef int n = 3
    cdef double xbuf[MAXN]
    cdef double gbuf[MAXN]
    cdef double br[4]
    cdef double sa, sb, fa, fb
    cdef int nbr = 0
    cdef int st, j
    st = _scan_window(geo, dirv, base, lo, hi, scale, br, &nbr, vlo_out, vhi_out)
    if st != OK:
        return st
    for j in range(nbr):
        sa = br[2 * j]
        sb = br[2 * j + 1]
        fa = _line_value(geo, dirv, base, n, sa, xbuf)
        fb = _line_value(geo, dirv, base, n, sb, xbuf)
        roots[nroots[0]] = _refine_bracket(geo, dirv, base, n, sa, fa, sb, fb, xbuf, gbuf)
        nroots[0] += 1
    return OK


cdef int _radial_hits(const double* geo, const double* v, const double* p,
                      double* hs, double* hq, double* hn, double* hm,
                      int* nh_out) noexcept:
    cdef int n = 3
    cdef double eps_apex = geo[2]
    cdef double eps_trans = geo[3]
    cdef double tol_surface = geo[4]
    cdef double rmin = geo[6]
    cdef double rmax = geo[7]
    cdef double xbuf[MAXN]
    cdef double gbuf[MAXN]
    cdef double w[4]
    cdef double aux[3]
    cdef double roots[6]
    cdef double q0 = p[0], q1 = p[1], q2 = p[2]
    cdef double v0 = v[0], v1 = v[1], v2 = v[2]
    cdef double rmax_w, apex_lo, apex_hi, lo, hi, lo1, hi1
    cdef double rmin_w, am, bm, cm, discm, sqm, qqm, m0, m1
    cdef double pnorm, qnorm, s_split, u_eps, near_lo, near_hi
    cdef double scale, vlo, vhi, s, xn, tmp, key
    cdef int cnt, i, j, st, nroots, nnew, uniq, nh

    nh_out[0] = 0

    rmax_w = rmax * (1.0 + 1e-9)
    cnt = _circular_cone_window(q0, q1, q2, v0, v1, v2, rmax_w * rmax_w, True, w)
    if cnt == 0:
        return OK
    apex_lo = -INFINITY
    apex_hi = INFINITY
    if v2 > 0.0:
        apex_lo = (eps_apex - q2) / v2
    elif v2 < 0.0:
        apex_hi = (eps_apex - q2) / v2
    elif q2 < eps_apex:
        return OK

    _interval_intersect(w[0], w[1], apex_lo, apex_hi, &lo, &hi)
    if cnt == 2:
        _interval_intersect(w[2], w[3], apex_lo, apex_hi, &lo1, &hi1)
        if lo > hi:
            lo = lo1
            hi = hi1
        elif lo1 <= hi1:
            # Convexity forbids two admissible pieces; a roundoff sliver can
            # briefly produce them, in which case the hull is a safe window.
            if lo1 < lo:
                lo = lo1
            if hi1 > hi:
                hi = hi1
    if lo > hi:
        return OK

    # Tighten with the inner circular cone: surface points satisfy
    # rho >= r_min * x3, so roots lie where the inner-cone quadratic is >= 0.
    rmin_w = rmin * (1.0 - 1e-9)
    am = (v0 * v0 + v1 * v1) - rmin_w * rmin_w * v2 * v2
    if am < 0.0:
        bm = 2.0 * ((q0 * v0 + q1 * v1) - rmin_w * rmin_w * q2 * v2)
        cm = (q0 * q0 + q1 * q1) - rmin_w * rmin_w * q2 * q2
        discm = bm * bm - 4.0 * am * cm
        if discm <= 0.0:
            return OK  # entire line strictly inside the inner cone
        sqm = sqrt(discm)
        if bm >= 0.0:
            qqm = -0.5 * (bm + sqm)
        else:
            qqm = -0.5 * (bm - sqm)
        m0 = qqm / am
        m1 = cm / qqm
        if m1 < m0:
            tmp = m0
            m0 = m1
            m1 = tmp
        _interval_intersect(lo, hi, m0, m1, &lo, &hi)
        if lo > hi:
            return OK

    pnorm = sqrt(q0 * q0 + q1 * q1 + q2 * q2)
    qnorm = pnorm

    # Split the search: |s| <= s_split on the line itself; |s| > s_split via
    # the degree-1 homogeneity F(p + s v) = s F(v + p/s) for s > 0 (and the
    # mirrored form for s < 0), which turns the far range into the bounded
    # auxiliary windows u = 1/|s| in (0, 1/s_split].
    s_split = 4.0 * (1.0 + pnorm)
    u_eps = 1e-12 / s_split

    nroots = 0

    near_lo = lo if lo > -s_split else -s_split
    near_hi = hi if hi < s_split else s_split
    if near_lo <= near_hi:
        scale = 1.0 + pnorm + s_split
        st = _scan_roots(geo, v, p, near_lo, near_hi, scale, roots, &nroots,
                         &vlo, &vhi)
        if st != OK:
            return st
        # A window end created by the apex cutoff that is already inside the
        # cone means the chord continues below the cutoff.
        if v2 > 0.0 and near_lo == apex_lo and vlo < 0.0:
            return APEX
        if v2 < 0.0 and near_hi == apex_hi and vhi < 0.0:
            return APEX

    if hi > s_split:
        aux[0] = v0
        aux[1] = v1
        aux[2] = v2
        scale = 2.0 + qnorm / s_split
        nnew = nroots
        st = _scan_roots(geo, p, aux, u_eps, 1.0 / s_split, scale, roots, &nnew,
                         &vlo, &vhi)
        if st != OK:
            return st
        for j in range(nroots, nnew):
            roots[j] = 1.0 / roots[j]
        nroots = nnew
    if lo < -s_split:
        aux[0] = -v0
        aux[1] = -v1
        aux[2] = -v2
        scale = 2.0 + qnorm / s_split
        nnew = nroots
        st = _scan_roots(geo, p, aux, u_eps, 1.0 / s_split, scale, roots, &nnew,
                         &vlo, &vhi)
        if st != OK:
            return st
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
        return TANGENT

    nh = 0
    for j in range(nroots):
        s = roots[j]
        xn = q2 + s * v2
        if xn < eps_apex * (1.0 + 1e-12):
            return APEX
        scale = 1.0 + pnorm + fabs(s)
        st = _finish_hit(geo, v, p, n, s, eps_trans, tol_surface, scale, nh,
                         hs, hq, hn, hm, xbuf, gbuf)
        if st != OK:
            return st
        nh += 1
    if nh == 2:
        if hs[1] < hs[0]:
            tmp = hs[0]
            hs[0] = hs[1]
            hs[1] = tmp
            for i in range(n):
                tmp = hq[i]
                hq[i] = hq[MAXN + i]
                hq[MAXN + i] = tmp
                tmp = hn[i]
                hn[i] = hn[MAXN + i]
                hn[MAXN + i] = tmp
            for i in range(3):
                tmp = hm[i]
                hm[i] = hm[3 + i]
                hm[3 + i] = tmp
        if not (hm[0] < 0.0 and hm[3] > 0.0):
            return TANGENT
    nh_out[0] = nh
    return OK


cdef int _hits(const double* geo, const double* v, const double* p,
               double* hs, double* hq, double* hn, double* hm, int* nh) noexcept:
    if geo[0] == 0.0:
        return _quadric_hits(geo, v, p, hs, hq, hn, hm, nh)
    return _radial_hits(geo, v, p, hs, hq, hn, hm, nh)


cdef int c_reflect_step(const double* geo, const double* v, const double* p,
                        double* out_v2, double* out_q2, double* out_hit,
                        double* out_scal) noexcept:
    cdef int n = <int>geo[1]
    cdef double hs[2]
    cdef double hq[2 * MAXN]
    cdef double hn[2 * MAXN]
    cdef double hm[6]
    cdef int nh = 0
    cdef int st, j, idx, i
    cdef double gn, cc, vn2, vnorm, qd
    st = _hits(geo, v, p, hs, hq, hn, hm, &nh)
    if st != OK:
        return st
    if nh == 0:
        return OUTSIDE
    idx = -1
    for j in range(nh):
        if hm[j * 3] > 0.0:
            idx = j
            break
    if idx < 0:
        return ESCAPED
    gn = hm[idx * 3 + 2]
    cc = hm[idx * 3] / gn
    vn2 = 0.0
    for i in range(n):
        out_v2[i] = v[i] - 2.0 * cc * hn[idx * MAXN + i]
        vn2 += out_v2[i] * out_v2[i]
    vnorm = sqrt(vn2)
    qd = 0.0
    for i in range(n):
        out_v2[i] = out_v2[i] / vnorm
        out_hit[i] = hq[idx * MAXN + i]
        qd += out_hit[i] * out_v2[i]
    for i in range(n):
        out_q2[i] = out_hit[i] - qd * out_v2[i]
    # second projection pass: one pass leaves <Q,v> ~ (q.v)*eps for far hits
    qd = 0.0
    for i in range(n):
        qd += out_q2[i] * out_v2[i]
    for i in range(n):
        out_q2[i] = out_q2[i] - qd * out_v2[i]
    out_scal[0] = hs[idx]
    out_scal[1] = 2.0 * cc / gn
    out_scal[2] = hm[idx * 3 + 1]
    out_scal[3] = gn
    return OK


def implicit_value(double[::1] geo, double[::1] x):
    return c_implicit_value(&geo[0], &x[0])


def implicit_gradient(double[::1] geo, double[::1] x, double[::1] out):
    return c_implicit_gradient(&geo[0], &x[0], &out[0])


def intersections(double[::1] geo, double[::1] v, double[::1] p,
                  double[::1] out_s, double[:, ::1] out_q,
                  double[:, ::1] out_nrm, double[:, ::1] out_misc):
    """See `_kernels_py.intersections`."""
    cdef int n = <int>geo[1]
    cdef double hs[2]
    cdef double hq[2 * MAXN]
    cdef double hn[2 * MAXN]
    cdef double hm[6]
    cdef int nh = 0
    cdef int st, j, i
    st = _hits(&geo[0], &v[0], &p[0], hs, hq, hn, hm, &nh)
    for j in range(nh):
        out_s[j] = hs[j]
        for i in range(n):
            out_q[j, i] = hq[j * MAXN + i]
            out_nrm[j, i] = hn[j * MAXN + i]
        for i in range(3):
            out_misc[j, i] = hm[j * 3 + i]
    return st, nh


def reflect_step(double[::1] geo, double[::1] v, double[::1] p,
                 double[::1] out_v2, double[::1] out_q2, double[::1] out_hit,
                 double[::1] out_scal):
    """See `_kernels_py.reflect_step`."""
    return c_reflect_step(&geo[0], &v[0], &p[0],
                          &out_v2[0], &out_q2[0], &out_hit[0], &out_scal[0])


def trace_terminal(double[::1] geo, double[::1] v, double[::1] p, long max_m,
                   double[::1] out_v, double[::1] out_q, double[::1] out_info):
    """See `_kernels_py.trace_terminal`."""
    cdef int n = <int>geo[1]
    cdef double cur_v[MAXN]
    cdef double cur_p[MAXN]
    cdef double tmp_v[MAXN]
    cdef double tmp_q[MAXN]
    cdef double tmp_hit[MAXN]
    cdef double tmp_scal[4]
    cdef long m = 0
    cdef double minmarg = INFINITY
    cdef int i, st
    for i in range(n):
        cur_v[i] = v[i]
        cur_p[i] = p[i]
    while True:
        st = c_reflect_step(&geo[0], cur_v, cur_p, tmp_v, tmp_q, tmp_hit, tmp_scal)
        if st == ESCAPED:
            for i in range(n):
                out_v[i] = cur_v[i]
                out_q[i] = cur_p[i]
            out_info[0] = <double>m
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
