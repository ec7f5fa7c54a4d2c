"""Brute-force dynamic programming over a velocity grid.

Validation oracle for the PMP solver. It uses the same discrete dynamics as
the backward sweep (``v_{k-1} = v_k - f(v_k) ds``, stage cost ``g(v_k) ds``)
but minimises exhaustively instead of through the Hamiltonian.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NoFeasiblePath, ValidationError
from .kernels import ModeTable
from .vehicle import mode_dvds, mode_feasible, running_cost

DEFAULT_RESOLUTION = 0.05
MAX_SAMPLES = 200


@dataclass
class DPGrid:
    """Value and policy tables indexed ``[boundary k, velocity index]``.

    Boundary 0 is the segment start. ``policy[k]`` is the mode index (into
    ``modes``) applied on sample ``k - 1``; -1 marks unreachable cells.
    """

    n: int
    v_grid: np.ndarray
    value: np.ndarray
    policy: np.ndarray
    modes: tuple


@dataclass
class DPResult:
    cost: float
    modes: list
    v: np.ndarray
    path_cost: float
    grid: DPGrid


def _interp_value(values, pos):
    """Linear interpolation of ``values`` at fractional grid positions ``pos``.

    Positions beyond the grid, or touching an unreachable (inf) cell with
    non-zero weight, give inf.
    """
    g = len(values)
    out = np.full(pos.shape, np.inf)
    inside = (pos >= 0) & (pos <= g - 1)
    p = pos[inside]
    lo = np.floor(p).astype(int)
    w = p - lo
    hi = np.minimum(lo + 1, g - 1)
    vlo = values[lo]
    vhi = values[hi]
    with np.errstate(invalid="ignore"):
        mixed = (1.0 - w) * vlo + w * vhi
    out[inside] = np.where(w > 0, mixed, vlo)
    return out


def dp_solve(cfg, prob, v_resolution=DEFAULT_RESOLUTION, tol=0.1, max_samples=MAX_SAMPLES):
    """Exhaustive optimum of the discretised problem.

    The grid is anchored at ``vf`` (an exact grid point) and spans up to
    ``v0 + tol``. Start cells within ``tol`` of ``v0`` have zero terminal cost,
    matching the boundary tolerance of the shooting solver.
    """
    if prob.n > max_samples:
        raise ValidationError(f"oracle limited to {max_samples} samples, got {prob.n}")
    if v_resolution <= 0:
        raise ValidationError("velocity resolution must be positive")
    n, ds = prob.n, prob.delta_s
    w_f, w_t = prob.weights.w_f, prob.weights.w_t
    count = int(np.floor((prob.v0 + tol - prob.vf) / v_resolution + 1e-9)) + 1
    v_grid = prob.vf + v_resolution * np.arange(count)

    # mode order matches the solver's tie-break preference
    modes = ModeTable.build(cfg).modes
    nm = len(modes)
    stage = np.full((nm, count), np.inf)
    nxt = np.zeros((nm, count))
    for i, m in enumerate(modes):
        ok = np.array([mode_feasible(cfg, m, v) for v in v_grid])
        f = mode_dvds(cfg, m, v_grid)
        stage[i, ok] = running_cost(cfg, m, v_grid[ok], w_f, w_t) * ds
        nxt[i] = (v_grid - f * ds - prob.vf) / v_resolution

    value = np.full((n + 1, count), np.inf)
    policy = np.full((n + 1, count), -1, dtype=int)
    value[0, np.abs(v_grid - prob.v0) <= tol + 1e-12] = 0.0
    for k in range(1, n + 1):
        cand = np.empty((nm, count))
        for i in range(nm):
            cand[i] = stage[i] + _interp_value(value[k - 1], nxt[i])
        best = np.argmin(cand, axis=0)
        value[k] = cand[best, np.arange(count)]
        policy[k] = np.where(np.isfinite(value[k]), best, -1)

    grid = DPGrid(n=n, v_grid=v_grid, value=value, policy=policy, modes=modes)
    cost = value[n, 0]
    if not np.isfinite(cost):
        raise NoFeasiblePath(
            f"no mode sequence reaches {prob.v0:.3f} m/s from {prob.vf:.3f} m/s in {n} samples")

    # replay from vf, re-minimising at the exact (off-grid) velocities
    v = np.empty(n + 1)
    v[n] = prob.vf
    path = [None] * n
    path_cost = 0.0
    for k in range(n, 0, -1):
        vk = v[k]
        best_c, best_i, best_v = np.inf, -1, vk
        for i, m in enumerate(modes):
            if not mode_feasible(cfg, m, vk):
                continue
            vn = vk - mode_dvds(cfg, m, vk) * ds
            c = running_cost(cfg, m, vk, w_f, w_t) * ds + \
                _interp_value(value[k - 1], np.array([(vn - prob.vf) / v_resolution]))[0]
            if c < best_c:
                best_c, best_i, best_v = c, i, vn
        if best_i < 0:
            raise NoFeasiblePath(f"replay left the reachable set at sample {k}")
        path[k - 1] = modes[best_i]
        path_cost += running_cost(cfg, modes[best_i], vk, w_f, w_t) * ds
        v[k - 1] = best_v
    return DPResult(cost=float(cost), modes=path, v=v, path_cost=float(path_cost), grid=grid)
