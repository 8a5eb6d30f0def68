"""Pure-Python implementation of the per-index cost kernels.

Mirrors ``_ckernels.pyx`` operation for operation; used when the compiled
extension is unavailable or ``OPTMERGE_PURE_PYTHON=1`` is set.

``model`` layout: ``[x0, v0, t0, L, alpha, U, has_dis, v_dk, u_bar, beta]``.
``region`` layout: ``[v_lo, v_hi, tl_slope, tl_intercept, t_floor, t_hi]``.
``dz0``/``dv``: initial spacing and speed difference from HDV k to each
HDV i > k.
"""

import math

_GR = (math.sqrt(5.0) - 1.0) / 2.0


def point_cost(model, dz0, dv, t, v):
    x0, v0, t0, L, alpha, U, has_dis, v_dk, u_bar, beta = model
    T = t - t0
    if T <= 0.0:
        return math.inf
    D = L - x0
    E = (2.0 * T * T * (v0 * v0 + v0 * v + v * v) - 6.0 * T * D * (v0 + v) + 6.0 * D * D) / (T * T * T)
    dt_sum = 0.0
    de_sum = 0.0
    if has_dis != 0.0:
        gap = v_dk - v
        if gap > 0.0:
            w = 1.0
            for j in range(len(dz0)):
                z = dz0[j] + T * dv[j]
                if z < 0.0:
                    z = 0.0
                w += math.exp(-beta * z)
            dt_sum = gap * gap / (2.0 * u_bar * v_dk) * w
            de_sum = 0.5 * u_bar * gap * w
    return alpha * (T + U + dt_sum) + (1.0 - alpha) * (E + de_sum)


def _t_lo(region, v):
    t = region[3] + region[2] * v
    return t if t > region[4] else region[4]


def _vs_cost(model, dz0, dv, region, v, s):
    lo = _t_lo(region, v)
    return point_cost(model, dz0, dv, lo + s * (region[5] - lo), v)


def grid_min(model, dz0, dv, region, n_t, n_v):
    """Best point of an n_t x n_v grid laid over the region.

    Returns ``(cost, t, v, s)``; ties keep the first point in (v, t) order.
    """
    v_lo, v_hi, t_hi = region[0], region[1], region[5]
    best = (math.inf, math.nan, math.nan, math.nan)
    for j in range(n_v):
        v = v_lo + (v_hi - v_lo) * j / (n_v - 1) if n_v > 1 else v_lo
        lo = _t_lo(region, v)
        if lo > t_hi:
            continue
        for i in range(n_t):
            s = i / (n_t - 1) if n_t > 1 else 0.0
            t = lo + s * (t_hi - lo)
            c = point_cost(model, dz0, dv, t, v)
            if c < best[0]:
                best = (c, t, v, s)
    return best


def _golden(model, dz0, dv, region, axis, fixed, a, b, tol):
    def f(x):
        if axis == 0:
            return _vs_cost(model, dz0, dv, region, x, fixed)
        return _vs_cost(model, dz0, dv, region, fixed, x)

    c = b - _GR * (b - a)
    d = a + _GR * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _GR * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GR * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _line(model, dz0, dv, region, axis, fixed, x, fx, h, lo, hi, tol):
    """Minimise along one axis inside [x-h, x+h]; never returns a worse point."""
    a = x - h if x - h > lo else lo
    b = x + h if x + h < hi else hi
    if b - a <= 0.0:
        return x, fx
    gx, gf = _golden(model, dz0, dv, region, axis, fixed, a, b, tol)
    for cand, cf in (
        (gx, gf),
        (a, _vs_cost(model, dz0, dv, region, a, fixed) if axis == 0 else _vs_cost(model, dz0, dv, region, fixed, a)),
        (b, _vs_cost(model, dz0, dv, region, b, fixed) if axis == 0 else _vs_cost(model, dz0, dv, region, fixed, b)),
    ):
        if cf < fx:
            x, fx = cand, cf
    return x, fx


def refine(model, dz0, dv, region, v, s, h_v, h_s, tol_v, tol_t, max_sweeps):
    """Coordinate descent in (v, s) with shrinking brackets.

    ``s`` in [0, 1] places the merging time between the earliest admissible
    time for the current ``v`` and the latest admissible time. Returns
    ``(cost, t, v, s, sweeps)``.
    """
    v_lo, v_hi, t_hi = region[0], region[1], region[5]
    fx = _vs_cost(model, dz0, dv, region, v, s)
    sweeps = 0
    for sweeps in range(1, max_sweeps + 1):
        v_prev, s_prev = v, s
        v, fx = _line(model, dz0, dv, region, 0, s, v, fx, h_v, v_lo, v_hi, tol_v)
        span = t_hi - _t_lo(region, v)
        if span > 0.0:
            tol_s = tol_t / span
            s, fx = _line(model, dz0, dv, region, 1, v, s, fx, h_s, 0.0, 1.0, tol_s)
        else:
            tol_s = 1.0
        mv = abs(v - v_prev)
        ms = abs(s - s_prev)
        if mv >= 0.75 * h_v:
            h_v *= 2.0
        elif mv < 0.25 * h_v:
            h_v = max(0.5 * h_v, tol_v)
        if ms >= 0.75 * h_s:
            h_s *= 2.0
        elif ms < 0.25 * h_s:
            h_s = max(0.5 * h_s, tol_s)
        if mv <= tol_v and ms <= tol_s and h_v <= tol_v and h_s <= tol_s:
            break
    lo = _t_lo(region, v)
    return fx, lo + s * (t_hi - lo), v, s, sweeps
