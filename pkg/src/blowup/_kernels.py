"""Compiled inner loop of the noisy-equation stepper.

Functions cross the Python/numba boundary as (code, params) pairs; see
``encode``.  Params are laid out as [k, p, s0, c].
"""

import math

import numpy as np
from numba import njit

CONSTANT, POWER, SHIFTED_POWER, EXPONENTIAL, PATH = 0, 1, 2, 3, 4
_CODES = {"constant": CONSTANT, "power": POWER, "shifted_power": SHIFTED_POWER,
          "exponential": EXPONENTIAL, "abs_brownian": PATH}

# stop reasons
T_MAX, CAP, RESOLUTION, UNDERFLOW, NONFINITE, MAX_STEPS = 0, 1, 2, 3, 4, 5

_EPS = 2.220446049250313e-16
# remaining time below which blow-up is declared without reaching y_cap
RESOLUTION_RTOL = 1e-12
_EMPTY = np.zeros(2)


def encode(f):
    """(code, params, path samples, path dt) for a FunctionSpec or None."""
    if f is None:
        return CONSTANT, np.zeros(4), _EMPTY, 1.0
    prm = np.array([f.k, f.p, f.s0, f.c], dtype=np.float64)
    if f.kind == "abs_brownian":
        return PATH, prm, np.ascontiguousarray(f.path.samples, dtype=np.float64), float(f.path.dt)
    return _CODES[f.kind], prm, _EMPTY, 1.0


@njit(cache=True, nogil=True)
def _pow(s, p):
    if p == 2.0:
        return s * s
    if p == 3.0:
        return s * s * s
    if p == 1.0:
        return s
    return s ** p


@njit(cache=True, nogil=True)
def _fs(code, k, p, s0, c, s):
    """Closed-form kinds only; sampled paths are handled inside the stepper."""
    if code == CONSTANT:
        return k
    if code == POWER:
        return k * _pow(s, p)
    if code == SHIFTED_POWER:
        return k * _pow(s - s0, p)
    return k * math.exp(c * s)


@njit(cache=True, nogil=True)
def _recip_tail(code, k, p, s0, c, y):
    """int_y^inf ds / b(s)."""
    if code == POWER and p > 1.0 and y > 0.0:
        return y ** (1.0 - p) / k / (p - 1.0)
    if code == SHIFTED_POWER and p > 1.0 and y > s0:
        return (y - s0) ** (1.0 - p) / k / (p - 1.0)
    if code == EXPONENTIAL and c > 0.0:
        # divided in two steps: k * c underflows to 0 for subnormal c
        return math.exp(-c * y) / k / c
    return math.inf


@njit(cache=True, nogil=True)
def _hermite(y0, y1, f0, f1, h, th):
    h00 = (1.0 + 2.0 * th) * (1.0 - th) ** 2
    h10 = th * (1.0 - th) ** 2
    h01 = th * th * (3.0 - 2.0 * th)
    h11 = th * th * (th - 1.0)
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


@njit(cache=True, nogil=True)
def _noise(gc, gk, gp, gs0, gcc, path, pdt, i, t):
    if gc == PATH:
        return path[i] + (t - i * pdt) / pdt * (path[i + 1] - path[i])
    return _fs(gc, gk, gp, gs0, gcc, t)


@njit(cache=True, nogil=True)
def solve_kernel(ac, ap, bc, bp, gc, gp, path, pdt, x0, t_max, h0, rtol, atol, h_max,
                 y_cap, level, record, max_steps):
    """Dormand-Prince 5(4) with PI step control.

    Steps never straddle a node of a sampled noise path, so the integrand is
    smooth within every step.  Returns
    (status, t, y, t_level, n_accepted, n_rejected, ts, ys, dys, errs, count).
    """
    # scalar copies keep the hot calls free of array arguments
    ak, apw, as0, acc = ap[0], ap[1], ap[2], ap[3]
    bk, bpw, bs0, bcc = bp[0], bp[1], bp[2], bp[3]
    gk, gpw, gs0, gcc = gp[0], gp[1], gp[2], gp[3]
    a_const = ac == CONSTANT
    cap = 256 if record else 1
    ts = np.empty(cap)
    ys = np.empty(cap)
    dys = np.empty(cap)
    errs = np.empty(cap)

    npath = path.shape[0] if gc == PATH else 0
    t = 0.0
    y = x0
    g0 = _noise(gc, gk, gpw, gs0, gcc, path, pdt, 0, 0.0)
    k1 = _fs(ac, ak, apw, as0, acc, 0.0) * _fs(bc, bk, bpw, bs0, bcc, y + g0)
    ts[0] = t
    ys[0] = y
    dys[0] = k1
    errs[0] = 0.0
    count = 1
    t_level = -1.0
    if level > 0.0 and y >= level:
        t_level = 0.0

    j = 1
    h = min(h0, t_max)
    if h_max > 0.0:
        h = min(h, h_max)
    err_prev = 1e-4
    n_acc = 0
    n_rej = 0
    status = MAX_STEPS

    while n_acc + n_rej < max_steps:
        if t >= t_max:
            status = T_MAX
            break
        h_try = h
        t_end = t + h_try
        clipped = False
        if t_end >= t_max or t_max - t_end < 0.01 * h_try:
            h_try = t_max - t
            t_end = t_max
            clipped = True
        if j < npath:
            tn = j * pdt
            if t_end >= tn or tn - t_end < 0.01 * h_try:
                h_try = tn - t
                t_end = tn
                clipped = True
        if h_try < 16.0 * _EPS * max(1.0, abs(t)):
            status = UNDERFLOW
            break

        seg = min(j - 1, npath - 2)
        t2 = t + h_try * 0.2
        t3 = t + h_try * 0.3
        t4 = t + h_try * 0.8
        t5 = t + h_try * (8.0 / 9.0)
        if a_const:
            a2 = a3 = a4 = a5 = a6 = ak
        else:
            a2 = _fs(ac, ak, apw, as0, acc, t2)
            a3 = _fs(ac, ak, apw, as0, acc, t3)
            a4 = _fs(ac, ak, apw, as0, acc, t4)
            a5 = _fs(ac, ak, apw, as0, acc, t5)
            a6 = _fs(ac, ak, apw, as0, acc, t_end)
        g2 = _noise(gc, gk, gpw, gs0, gcc, path, pdt, seg, t2)
        g3 = _noise(gc, gk, gpw, gs0, gcc, path, pdt, seg, t3)
        g4 = _noise(gc, gk, gpw, gs0, gcc, path, pdt, seg, t4)
        g5 = _noise(gc, gk, gpw, gs0, gcc, path, pdt, seg, t5)
        g6 = _noise(gc, gk, gpw, gs0, gcc, path, pdt, seg, t_end)

        k2 = a2 * _fs(bc, bk, bpw, bs0, bcc, y + h_try * (0.2 * k1) + g2)
        k3 = a3 * _fs(bc, bk, bpw, bs0, bcc, y + h_try * (3.0 / 40.0 * k1 + 9.0 / 40.0 * k2) + g3)
        k4 = a4 * _fs(bc, bk, bpw, bs0, bcc,
                      y + h_try * (44.0 / 45.0 * k1 - 56.0 / 15.0 * k2 + 32.0 / 9.0 * k3) + g4)
        k5 = a5 * _fs(bc, bk, bpw, bs0, bcc,
                      y + h_try * (19372.0 / 6561.0 * k1 - 25360.0 / 2187.0 * k2
                                   + 64448.0 / 6561.0 * k3 - 212.0 / 729.0 * k4) + g5)
        k6 = a6 * _fs(bc, bk, bpw, bs0, bcc,
                      y + h_try * (9017.0 / 3168.0 * k1 - 355.0 / 33.0 * k2 + 46732.0 / 5247.0 * k3
                                   + 49.0 / 176.0 * k4 - 5103.0 / 18656.0 * k5) + g6)
        y_new = y + h_try * (35.0 / 384.0 * k1 + 500.0 / 1113.0 * k3 + 125.0 / 192.0 * k4
                             - 2187.0 / 6784.0 * k5 + 11.0 / 84.0 * k6)
        k7 = a6 * _fs(bc, bk, bpw, bs0, bcc, y_new + g6)
        e = h_try * (71.0 / 57600.0 * k1 - 71.0 / 16695.0 * k3 + 71.0 / 1920.0 * k4
                     - 17253.0 / 339200.0 * k5 + 22.0 / 525.0 * k6 - 1.0 / 40.0 * k7)
        scale = atol + rtol * max(abs(y), abs(y_new))
        err = abs(e) / scale

        if not (math.isfinite(y_new) and math.isfinite(err) and math.isfinite(k7)):
            h = 0.25 * h_try
            n_rej += 1
            continue

        if err <= 1.0:
            n_acc += 1
            if level > 0.0 and t_level < 0.0 and y < level <= y_new:
                lo_th, hi_th = 0.0, 1.0
                for _ in range(60):
                    mid = 0.5 * (lo_th + hi_th)
                    if _hermite(y, y_new, k1, k7, h_try, mid) < level:
                        lo_th = mid
                    else:
                        hi_th = mid
                t_level = t + 0.5 * (lo_th + hi_th) * h_try
            t = t_end
            if j < npath and t == j * pdt:
                j += 1
            y = y_new
            k1 = k7
            if record:
                if count == cap:
                    cap *= 2
                    ts2 = np.empty(cap)
                    ys2 = np.empty(cap)
                    dys2 = np.empty(cap)
                    errs2 = np.empty(cap)
                    ts2[:count] = ts[:count]
                    ys2[:count] = ys[:count]
                    dys2[:count] = dys[:count]
                    errs2[:count] = errs[:count]
                    ts, ys, dys, errs = ts2, ys2, dys2, errs2
                ts[count] = t
                ys[count] = y
                dys[count] = k7
                errs[count] = abs(e)
                count += 1
            fac = 0.9 * max(err, 1e-10) ** (-0.7 / 5.0) * err_prev ** (0.4 / 5.0)
            fac = min(5.0, max(0.2, fac))
            h_new = h_try * fac
            if clipped:
                h_new = max(h_new, h)
            h = h_new
            if h_max > 0.0:
                h = min(h, h_max)
            err_prev = max(err, 1e-4)
            if y >= y_cap:
                status = CAP
                break
            if _recip_tail(bc, bk, bpw, bs0, bcc, y) / a6 <= RESOLUTION_RTOL * max(1.0, t):
                status = RESOLUTION
                break
        else:
            h = h_try * max(0.2, 0.9 * err ** -0.2)
            n_rej += 1

    if not record:
        count = 1
        ts[0] = t
        ys[0] = y
    return status, t, y, t_level, n_acc, n_rej, ts, ys, dys, errs, count
