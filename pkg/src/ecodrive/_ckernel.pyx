# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled backward sweep. Must stay arithmetically identical to _pykernel.py."""

from libc.math cimport isfinite

cdef int OK = 0
cdef int NO_MODE = 1
cdef int ABOVE_CAP = 2
cdef int BELOW_FLOOR = 3
cdef int NONFINITE = 4

cdef double TIE_EPS = 1e-12


cdef inline double _interp(double x, const double[:] xs, const double[:] ys) noexcept nogil:
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i
    cdef double t
    if x <= xs[0]:
        return ys[0]
    if x >= xs[n - 1]:
        return ys[n - 1]
    i = 1
    while xs[i] < x:
        i += 1
    t = (x - xs[i - 1]) / (xs[i] - xs[i - 1])
    return ys[i - 1] + t * (ys[i] - ys[i - 1])


cdef inline bint _eval(Py_ssize_t j, double v, double lam,
                       const int[:] kind, const double[:] c, const double[:] k,
                       const double[:] kinv, const double[:] q, const double[:] extra,
                       const double[:] params, const double[:] tq_rpm, const double[:] tq_nm,
                       double w_f, double w_t,
                       double* h, double* f, double* dh) noexcept nogil:
    cdef double a = params[0]
    cdef double b = params[1]
    cdef int kd = kind[j]
    cdef double num, dnum, df, g, dg, cst, omega, torque, mdot, dmdot
    cdef double b0, b1, b2, b3, b4, b5
    if kd == 1:
        num = a * v * v + b
        f[0] = -q[j] * num / v
        df = -q[j] * (a * v * v - b) / (v * v)
        cst = w_f * params[10] + w_t
        g = cst / v
        dg = -cst / (v * v)
        h[0] = lam * f[0] + g
        dh[0] = lam * df + dg
        return True
    omega = c[j] * v
    if omega < params[11] or omega > params[12]:
        return False
    if kd == 0:
        torque = (a * v * v + b) * kinv[j]
        if torque > _interp(omega, tq_rpm, tq_nm):
            return False
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
        f[0] = 0.0
        h[0] = g
        dh[0] = dg
        return True
    num = k[j] * (params[8] + params[9] * omega + extra[j]) + a * v * v + b
    dnum = k[j] * params[9] * c[j] + 2.0 * a * v
    f[0] = -q[j] * num / v
    df = -q[j] * (dnum * v - num) / (v * v)
    g = w_t / v
    dg = -w_t / (v * v)
    h[0] = lam * f[0] + g
    dh[0] = lam * df + dg
    return True


def eval_mode(Py_ssize_t j, double v, double lam, const int[:] kind, const double[:] c,
              const double[:] k, const double[:] kinv, const double[:] q,
              const double[:] extra, const double[:] params, const double[:] tq_rpm,
              const double[:] tq_nm, double w_f, double w_t):
    cdef double h = 0.0, f = 0.0, dh = 0.0
    cdef bint ok = _eval(j, v, lam, kind, c, k, kinv, q, extra, params, tq_rpm, tq_nm,
                         w_f, w_t, &h, &f, &dh)
    if not ok:
        return False, 0.0, 0.0, 0.0
    return True, h, f, dh


def sweep(const int[:] kind, const double[:] c, const double[:] k, const double[:] kinv,
          const double[:] q, const double[:] extra, const double[:] params,
          const double[:] tq_rpm, const double[:] tq_nm,
          double v_end, double lam_end, double ds, double w_f, double w_t,
          double v_cap, double v_floor,
          double[:] v_out, double[:] lam_out, int[:] mode_out):
    cdef Py_ssize_t n = mode_out.shape[0]
    cdef Py_ssize_t nmodes = kind.shape[0]
    cdef Py_ssize_t idx, j, best
    cdef double v = v_end
    cdef double lam = lam_end
    cdef double h, f, dh, best_h, best_f, best_dh, v_new
    cdef int status = OK
    cdef Py_ssize_t at = 0
    with nogil:
        v_out[n] = v
        lam_out[n] = lam
        idx = n
        while idx > 0:
            best = -1
            best_h = 0.0
            best_f = 0.0
            best_dh = 0.0
            for j in range(nmodes):
                if _eval(j, v, lam, kind, c, k, kinv, q, extra, params, tq_rpm, tq_nm,
                         w_f, w_t, &h, &f, &dh):
                    if best < 0 or h < best_h - TIE_EPS:
                        best = j
                        best_h = h
                        best_f = f
                        best_dh = dh
            if best < 0:
                status = NO_MODE
                at = idx
                break
            mode_out[idx - 1] = best
            v_new = v - best_f * ds
            lam = lam + best_dh * ds
            v = v_new
            if not (isfinite(v) and isfinite(lam)):
                status = NONFINITE
                at = idx - 1
                break
            v_out[idx - 1] = v
            lam_out[idx - 1] = lam
            if v > v_cap:
                status = ABOVE_CAP
                at = idx - 1
                break
            if v < v_floor:
                status = BELOW_FLOOR
                at = idx - 1
                break
            idx -= 1
    return status, at
