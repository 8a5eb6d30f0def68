# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-index cost kernels.

Same arguments and results as ``_pykernels``; see that module for the
``model`` and ``region`` layouts.
"""

from libc.math cimport exp, sqrt, fabs, INFINITY, NAN


cdef double _GR = (sqrt(5.0) - 1.0) / 2.0


cdef struct Model:
    double x0, v0, t0, L, alpha, U, has_dis, v_dk, u_bar, beta
    const double* dz0
    const double* dv
    Py_ssize_t m


cdef struct Region:
    double v_lo, v_hi, slope, intercept, t_floor, t_hi


cdef inline double _cost(const Model* md, double t, double v) nogil:
    cdef double T = t - md.t0
    if T <= 0.0:
        return INFINITY
    cdef double D = md.L - md.x0
    cdef double E = (2.0 * T * T * (md.v0 * md.v0 + md.v0 * v + v * v)
                     - 6.0 * T * D * (md.v0 + v) + 6.0 * D * D) / (T * T * T)
    cdef double dt_sum = 0.0, de_sum = 0.0, gap, w, z
    cdef Py_ssize_t j
    if md.has_dis != 0.0:
        gap = md.v_dk - v
        if gap > 0.0:
            w = 1.0
            for j in range(md.m):
                z = md.dz0[j] + T * md.dv[j]
                if z < 0.0:
                    z = 0.0
                w += exp(-md.beta * z)
            dt_sum = gap * gap / (2.0 * md.u_bar * md.v_dk) * w
            de_sum = 0.5 * md.u_bar * gap * w
    return md.alpha * (T + md.U + dt_sum) + (1.0 - md.alpha) * (E + de_sum)


cdef inline double _t_lo(const Region* rg, double v) nogil:
    cdef double t = rg.intercept + rg.slope * v
    return t if t > rg.t_floor else rg.t_floor


cdef inline double _vs_cost(const Model* md, const Region* rg, double v, double s) nogil:
    cdef double lo = _t_lo(rg, v)
    return _cost(md, lo + s * (rg.t_hi - lo), v)


cdef inline double _axis_cost(const Model* md, const Region* rg, int axis, double fixed, double x) nogil:
    if axis == 0:
        return _vs_cost(md, rg, x, fixed)
    return _vs_cost(md, rg, fixed, x)


cdef void _unpack(Model* md, Region* rg, const double[::1] model, const double[::1] dz0,
                  const double[::1] dv, const double[::1] region):
    md.x0 = model[0]; md.v0 = model[1]; md.t0 = model[2]; md.L = model[3]
    md.alpha = model[4]; md.U = model[5]; md.has_dis = model[6]; md.v_dk = model[7]
    md.u_bar = model[8]; md.beta = model[9]
    md.m = dz0.shape[0]
    md.dz0 = &dz0[0] if md.m > 0 else NULL
    md.dv = &dv[0] if md.m > 0 else NULL
    rg.v_lo = region[0]; rg.v_hi = region[1]; rg.slope = region[2]
    rg.intercept = region[3]; rg.t_floor = region[4]; rg.t_hi = region[5]


def point_cost(const double[::1] model, const double[::1] dz0, const double[::1] dv,
               double t, double v):
    cdef Model md
    cdef Region rg
    cdef double[6] dummy = [0, 0, 0, 0, 0, 0]
    _unpack(&md, &rg, model, dz0, dv, dummy)
    return _cost(&md, t, v)


def grid_min(const double[::1] model, const double[::1] dz0, const double[::1] dv,
             const double[::1] region, int n_t, int n_v):
    cdef Model md
    cdef Region rg
    _unpack(&md, &rg, model, dz0, dv, region)
    cdef double best_c = INFINITY, best_t = NAN, best_v = NAN, best_s = NAN
    cdef double v, lo, s, t, c
    cdef int i, j
    with nogil:
        for j in range(n_v):
            if n_v > 1:
                v = rg.v_lo + (rg.v_hi - rg.v_lo) * j / (n_v - 1)
            else:
                v = rg.v_lo
            lo = _t_lo(&rg, v)
            if lo > rg.t_hi:
                continue
            for i in range(n_t):
                s = (<double> i) / (n_t - 1) if n_t > 1 else 0.0
                t = lo + s * (rg.t_hi - lo)
                c = _cost(&md, t, v)
                if c < best_c:
                    best_c = c; best_t = t; best_v = v; best_s = s
    return best_c, best_t, best_v, best_s


cdef double _golden(const Model* md, const Region* rg, int axis, double fixed,
                    double a, double b, double tol, double* fx_out) nogil:
    cdef double c = b - _GR * (b - a)
    cdef double d = a + _GR * (b - a)
    cdef double fc = _axis_cost(md, rg, axis, fixed, c)
    cdef double fd = _axis_cost(md, rg, axis, fixed, d)
    while b - a > tol:
        if fc <= fd:
            b = d; d = c; fd = fc
            c = b - _GR * (b - a)
            fc = _axis_cost(md, rg, axis, fixed, c)
        else:
            a = c; c = d; fc = fd
            d = a + _GR * (b - a)
            fd = _axis_cost(md, rg, axis, fixed, d)
    cdef double x = 0.5 * (a + b)
    fx_out[0] = _axis_cost(md, rg, axis, fixed, x)
    return x


cdef double _line(const Model* md, const Region* rg, int axis, double fixed, double x,
                  double* fx, double h, double lo, double hi, double tol) nogil:
    cdef double a = x - h if x - h > lo else lo
    cdef double b = x + h if x + h < hi else hi
    if b - a <= 0.0:
        return x
    cdef double gf, fa, fb
    cdef double gx = _golden(md, rg, axis, fixed, a, b, tol, &gf)
    if gf < fx[0]:
        x = gx; fx[0] = gf
    fa = _axis_cost(md, rg, axis, fixed, a)
    if fa < fx[0]:
        x = a; fx[0] = fa
    fb = _axis_cost(md, rg, axis, fixed, b)
    if fb < fx[0]:
        x = b; fx[0] = fb
    return x


def refine(const double[::1] model, const double[::1] dz0, const double[::1] dv,
           const double[::1] region, double v, double s, double h_v, double h_s,
           double tol_v, double tol_t, int max_sweeps):
    cdef Model md
    cdef Region rg
    _unpack(&md, &rg, model, dz0, dv, region)
    cdef double fx = _vs_cost(&md, &rg, v, s)
    cdef double v_prev, s_prev, span, tol_s, mv, ms, lo
    cdef int sweeps = 0, it
    with nogil:
        for it in range(1, max_sweeps + 1):
            sweeps = it
            v_prev = v; s_prev = s
            v = _line(&md, &rg, 0, s, v, &fx, h_v, rg.v_lo, rg.v_hi, tol_v)
            span = rg.t_hi - _t_lo(&rg, v)
            if span > 0.0:
                tol_s = tol_t / span
                s = _line(&md, &rg, 1, v, s, &fx, h_s, 0.0, 1.0, tol_s)
            else:
                tol_s = 1.0
            mv = fabs(v - v_prev)
            ms = fabs(s - s_prev)
            if mv >= 0.75 * h_v:
                h_v *= 2.0
            elif mv < 0.25 * h_v:
                h_v = 0.5 * h_v if 0.5 * h_v > tol_v else tol_v
            if ms >= 0.75 * h_s:
                h_s *= 2.0
            elif ms < 0.25 * h_s:
                h_s = 0.5 * h_s if 0.5 * h_s > tol_s else tol_s
            if mv <= tol_v and ms <= tol_s and h_v <= tol_v and h_s <= tol_s:
                break
    lo = _t_lo(&rg, v)
    return fx, lo + s * (rg.t_hi - lo), v, s, sweeps
