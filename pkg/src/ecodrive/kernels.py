"""Backend selection for the backward-sweep kernel.

The compiled extension ``_ckernel`` is used when it imports; otherwise the
pure-Python ``_pykernel`` takes over. Set ``ECODRIVE_PURE_PYTHON=1`` to force
the fallback. Both share the flat :class:`ModeTable` layout.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _pykernel
from .vehicle import ModeKind

OK = _pykernel.OK
NO_MODE = _pykernel.NO_MODE
ABOVE_CAP = _pykernel.ABOVE_CAP
BELOW_FLOOR = _pykernel.BELOW_FLOOR
NONFINITE = _pykernel.NONFINITE
TIE_EPS = _pykernel.TIE_EPS

_ckernel = None
if not os.environ.get("ECODRIVE_PURE_PYTHON"):
    try:
        from . import _ckernel
    except ImportError:  # extension not built
        _ckernel = None

BACKEND = "cython" if _ckernel is not None else "python"


def backend_module(name=None):
    name = name or BACKEND
    if name == "cython":
        if _ckernel is None:
            raise RuntimeError("compiled kernel is not available")
        return _ckernel
    if name == "python":
        return _pykernel
    raise ValueError(f"unknown backend {name!r}")


def _tie_key(mode):
    # higher gear first, then cruising < eco-roll < coasting < engine-brake
    return (-mode.gear, int(mode.kind))


@dataclass(frozen=True)
class ModeTable:
    """Per-mode coefficients in tie-break preference order.

    ``params`` holds ``a, b, beta0..beta5, gamma0, gamma1, mdot_idle,
    omega_min, omega_max``.
    """

    modes: tuple
    kind: np.ndarray
    c: np.ndarray
    k: np.ndarray
    kinv: np.ndarray
    q: np.ndarray
    extra: np.ndarray
    params: np.ndarray
    tq_rpm: np.ndarray
    tq_nm: np.ndarray

    @classmethod
    def build(cls, cfg):
        modes = sorted(cfg.modes(), key=_tie_key)
        if not cfg.eco_roll_enabled:
            modes = [m for m in modes if m.kind != ModeKind.ECO_ROLL]
        r2 = cfg.wheel_radius ** 2
        kind, c, k, kinv, q, extra = [], [], [], [], [], []
        for m in modes:
            kind.append(int(m.kind))
            if m.kind == ModeKind.ECO_ROLL:
                c.append(0.0)
                k.append(0.0)
                kinv.append(0.0)
            else:
                c.append(cfg.speed_factor(m.gear))
                k.append(cfg.wheel_torque_factor(m.gear))
                kinv.append(1.0 / cfg.wheel_torque_factor(m.gear))
            q.append(r2 / cfg.effective_inertia(m))
            extra.append(cfg.brake_torque if m.kind == ModeKind.ENGINE_BRAKE else 0.0)
        env = cfg.envelope
        params = [cfg.drag_factor, cfg.rolling_force, *cfg.beta, *cfg.gamma,
                  cfg.mdot_idle, env.omega_min, env.omega_max]
        f64 = lambda x: np.ascontiguousarray(x, dtype=np.float64)
        return cls(
            modes=tuple(modes),
            kind=np.ascontiguousarray(kind, dtype=np.intc),
            c=f64(c), k=f64(k), kinv=f64(kinv), q=f64(q), extra=f64(extra),
            params=f64(params),
            tq_rpm=f64(env.torque_curve_rpm), tq_nm=f64(env.torque_curve_nm),
        )

    def arrays(self):
        return (self.kind, self.c, self.k, self.kinv, self.q, self.extra,
                self.params, self.tq_rpm, self.tq_nm)

    def index(self, mode):
        return self.modes.index(mode)


def evaluate(table, j, v, lam, w_f, w_t, backend=None):
    """``(feasible, H, f, dH/dv)`` of table entry ``j`` using the kernel formulas."""
    mod = backend_module(backend)
    kind, c, k, kinv, q, extra, params, tq_rpm, tq_nm = table.arrays()
    return mod.eval_mode(j, float(v), float(lam), kind, c, k, kinv, q, extra, params,
                         tq_rpm, tq_nm, float(w_f), float(w_t))


def sweep(table, n, v_end, lam_end, ds, w_f, w_t, v_cap, v_floor, backend=None):
    """Run one backward sweep. Returns ``(status, k, v, lam, mode_idx)``."""
    mod = backend_module(backend)
    v = np.full(n + 1, np.nan)
    lam = np.full(n + 1, np.nan)
    mode_idx = np.full(n, -1, dtype=np.intc)
    if mod is _pykernel:
        vl, ll, ml = v.tolist(), lam.tolist(), mode_idx.tolist()
        arrays = [a.tolist() for a in table.arrays()]
        status, at = mod.sweep(*arrays, float(v_end), float(lam_end), float(ds),
                               float(w_f), float(w_t), float(v_cap), float(v_floor),
                               vl, ll, ml)
        v[:] = vl
        lam[:] = ll
        mode_idx[:] = ml
    else:
        status, at = mod.sweep(*table.arrays(), float(v_end), float(lam_end), float(ds),
                               float(w_f), float(w_t), float(v_cap), float(v_floor),
                               v, lam, mode_idx)
    return status, at, v, lam, mode_idx
