"""Pure-Python backward sweep. Mirrors ``_ckernel.pyx`` operation for operation.

Mode tables are passed as flat sequences in tie-break preference order; see
``kernels.ModeTable`` for the layout of ``params``.
"""

import math

OK = 0
NO_MODE = 1
ABOVE_CAP = 2
BELOW_FLOOR = 3
NONFINITE = 4

TIE_EPS = 1e-12


def interp(x, xs, ys):
    n = len(xs)
    if x <= xs[0]:
        return ys[0]
    if x >= xs[n - 1]:
        return ys[n - 1]
    i = 1
    while xs[i] < x:
        i += 1
    t = (x - xs[i - 1]) / (xs[i] - xs[i - 1])
    return ys[i - 1] + t * (ys[i] - ys[i - 1])


def eval_mode(j, v, lam, kind, c, k, kinv, q, extra, params, tq_rpm, tq_nm, w_f, w_t):
    """Return ``(feasible, H, f, dH/dv)`` of table entry ``j`` at ``(v, lam)``."""
    a = params[0]
    b = params[1]
    kd = kind[j]
    if kd == 1:
        num = a * v * v + b
        f = -q[j] * num / v
        df = -q[j] * (a * v * v - b) / (v * v)
        cst = w_f * params[10] + w_t
        g = cst / v
        dg = -cst / (v * v)
        return True, lam * f + g, f, lam * df + dg
    omega = c[j] * v
    if omega < params[11] or omega > params[12]:
        return False, 0.0, 0.0, 0.0
    if kd == 0:
        torque = (a * v * v + b) * kinv[j]
        if torque > interp(omega, tq_rpm, tq_nm):
            return False, 0.0, 0.0, 0.0
        b0 = params[2]
        b1 = params[3]
        b2 = params[4]
        b3 = params[5]
        b4 = params[6]
        b5 = params[7]
        mdot = b0 + b1 * omega + b2 * torque + b3 * omega * omega + b4 * omega * torque + b5 * torque * torque
        dmdot = ((b1 + 2.0 * b3 * omega + b4 * torque) * c[j]
                 + (b2 + b4 * omega + 2.0 * b5 * torque) * (2.0 * a * v * kinv[j]))
        g = (w_f * mdot + w_t) / v
        dg = (w_f * dmdot * v - (w_f * mdot + w_t)) / (v * v)
        return True, g, 0.0, dg
    num = k[j] * (params[8] + params[9] * omega + extra[j]) + a * v * v + b
    dnum = k[j] * params[9] * c[j] + 2.0 * a * v
    f = -q[j] * num / v
    df = -q[j] * (dnum * v - num) / (v * v)
    g = w_t / v
    dg = -w_t / (v * v)
    return True, lam * f + g, f, lam * df + dg


def sweep(kind, c, k, kinv, q, extra, params, tq_rpm, tq_nm,
          v_end, lam_end, ds, w_f, w_t, v_cap, v_floor,
          v_out, lam_out, mode_out):
    """Backward recursion from sample ``N`` to 0. Returns ``(status, k)``.

    On failure ``k`` is the sample index at which the recursion stopped and
    entries below it are left untouched.
    """
    n = len(mode_out)
    nmodes = len(kind)
    v = float(v_end)
    lam = float(lam_end)
    v_out[n] = v
    lam_out[n] = lam
    for idx in range(n, 0, -1):
        best = -1
        best_h = 0.0
        best_f = 0.0
        best_dh = 0.0
        for j in range(nmodes):
            ok, h, f, dh = eval_mode(j, v, lam, kind, c, k, kinv, q, extra,
                                     params, tq_rpm, tq_nm, w_f, w_t)
            if ok and (best < 0 or h < best_h - TIE_EPS):
                best = j
                best_h = h
                best_f = f
                best_dh = dh
        if best < 0:
            return NO_MODE, idx
        mode_out[idx - 1] = best
        v_new = v - best_f * ds
        lam = lam + best_dh * ds
        v = v_new
        if not (math.isfinite(v) and math.isfinite(lam)):
            return NONFINITE, idx - 1
        v_out[idx - 1] = v
        lam_out[idx - 1] = lam
        if v > v_cap:
            return ABOVE_CAP, idx - 1
        if v < v_floor:
            return BELOW_FLOOR, idx - 1
    return OK, 0
