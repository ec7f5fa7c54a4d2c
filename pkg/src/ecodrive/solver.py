"""Discrete PMP solver over driving modes with bisection on the terminal co-state.

The segment ``[s0, sf]`` is split into ``N`` samples of length ``ds``. Starting
from the terminal condition ``v_N = vf`` and a guess ``lambda_N``, the sweep
walks backward: at each boundary it keeps the feasible mode with the smallest
Hamiltonian ``H = lambda * f(v) + g(v)`` and steps

    v_{k-1}      = v_k - f(v_k) * ds
    lambda_{k-1} = lambda_k + dH/dv(v_k, lambda_k) * ds

The mode chosen at boundary ``k`` drives sample ``k - 1``. ``solve_costate``
then bisects ``lambda_N`` until the recovered start velocity matches ``v0``.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import (
    BracketNotSignChanging,
    InfeasibleAtSample,
    MaxIterationsExceeded,
    NonFiniteState,
    ValidationError,
)
from .vehicle import (
    ModeKind,
    cruise_torque,
    engine_speed,
    mode_derivatives,
    mode_dvds,
    mode_feasible,
    mode_fuel_rate,
    running_cost,
)

log = logging.getLogger(__name__)

DEFAULT_BRACKET = (-1e6, 1e6)
DEFAULT_TOL = 0.1
DEFAULT_MAX_ITER = 60
V_FLOOR = 0.5
V_CAP = 40.0


@dataclass(frozen=True)
class CostWeights:
    """Fuel weight per gram and time weight per second."""

    w_f: float = 1.0
    w_t: float = 15.0

    def __post_init__(self):
        if not self.w_f > 0:
            raise ValidationError("w_f must be positive")
        if self.w_t < 0:
            raise ValidationError("w_t must be non-negative")

    @property
    def phi(self):
        return self.w_t / self.w_f

    @classmethod
    def from_phi(cls, phi, w_f=1.0):
        return cls(w_f=w_f, w_t=phi * w_f)

    def scaled(self, factor):
        return CostWeights(self.w_f * factor, self.w_t * factor)


@dataclass(frozen=True)
class SegmentProblem:
    s0: float
    sf: float
    v0: float
    vf: float
    n: int = 200
    weights: CostWeights = field(default_factory=CostWeights)

    def __post_init__(self):
        if not self.sf > self.s0:
            raise ValidationError("segment end must lie beyond its start")
        if int(self.n) != self.n or self.n < 2:
            raise ValidationError("need at least 2 distance samples")
        if not self.vf > 0:
            raise ValidationError("final velocity must be positive")
        if self.v0 < self.vf:
            raise ValidationError("only deceleration events are supported (v0 >= vf)")

    @property
    def delta_s(self):
        return (self.sf - self.s0) / self.n

    @property
    def positions(self):
        return self.s0 + self.delta_s * np.arange(self.n + 1)


@dataclass
class CostateBracket:
    lo: float = DEFAULT_BRACKET[0]
    hi: float = DEFAULT_BRACKET[1]

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValidationError("bracket lower bound must be below the upper bound")

    @property
    def mid(self):
        return 0.5 * (self.lo + self.hi)

    @property
    def width(self):
        return self.hi - self.lo


@dataclass
class SolveResult:
    """Solved profile. Boundary arrays have ``N + 1`` entries, per-sample arrays ``N``.

    ``omega_e`` and ``torque`` are evaluated at the right boundary of each
    sample, where the mode was selected; ``torque`` is NaN outside cruising.
    """

    s: np.ndarray
    v: np.ndarray
    lam: np.ndarray
    modes: list
    gear: np.ndarray
    kind: np.ndarray
    omega_e: np.ndarray
    torque: np.ndarray
    fuel: np.ndarray
    time: np.ndarray
    cost_J: float
    weights: CostWeights
    lambda_N: float
    converged: bool = False
    iterations: int = 0
    error: float = float("nan")
    trace: list = field(default_factory=list)

    @property
    def n(self):
        return len(self.modes)

    @property
    def total_fuel(self):
        return float(self.fuel.sum())

    @property
    def total_time(self):
        return float(self.time.sum())


def hamiltonian(cfg, weights, mode, v, lam):
    """``lambda * f + g`` for ``mode`` at ``(v, lambda)``."""
    return lam * mode_dvds(cfg, mode, v) + running_cost(cfg, mode, v, weights.w_f, weights.w_t)


def hamiltonian_dv(cfg, weights, mode, v, lam):
    dfdv, dgdv = mode_derivatives(cfg, mode, v, weights.w_f, weights.w_t)
    return lam * dfdv + dgdv


def feasible_modes(cfg, v):
    """Modes whose engine speed and torque respect the envelope at ``v``."""
    if v <= 0:
        raise ValueError("velocity must be positive")
    return [m for m in cfg.modes() if mode_feasible(cfg, m, v)]


def _table(cfg, table):
    return table if table is not None else kernels.ModeTable.build(cfg)


def _raise_for(status, at, v):
    if status == kernels.NO_MODE:
        raise InfeasibleAtSample(at, v)
    if status == kernels.ABOVE_CAP:
        raise InfeasibleAtSample(at, v, "velocity above cap")
    if status == kernels.BELOW_FLOOR:
        raise InfeasibleAtSample(at, v, "velocity below floor")
    if status == kernels.NONFINITE:
        raise NonFiniteState(at)


def build_result(cfg, prob, table, v, lam, mode_idx, lambda_N):
    """Assemble a :class:`SolveResult` from raw sweep arrays."""
    ds = prob.delta_s
    w = prob.weights
    modes = [table.modes[j] for j in mode_idx]
    n = prob.n
    omega = np.empty(n)
    torque = np.full(n, np.nan)
    fuel = np.empty(n)
    for k, m in enumerate(modes):
        vk = v[k + 1]
        omega[k] = engine_speed(cfg, m, vk)
        if m.kind == ModeKind.CRUISING:
            torque[k] = cruise_torque(cfg, m.gear, vk)
        fuel[k] = mode_fuel_rate(cfg, m, vk) / vk * ds
    time = ds / v[1:]
    cost = float(np.sum(w.w_f * fuel + w.w_t * time))
    return SolveResult(
        s=prob.positions, v=v.copy(), lam=lam.copy(), modes=modes,
        gear=np.array([m.gear for m in modes], dtype=int),
        kind=np.array([int(m.kind) for m in modes], dtype=int),
        omega_e=omega, torque=torque, fuel=fuel, time=time, cost_J=cost,
        weights=w, lambda_N=float(lambda_N),
    )


def backward_sweep(cfg, prob, lambda_N, *, v_cap=V_CAP, v_floor=V_FLOOR,
                   table=None, backend=None):
    """Run one backward pass from ``v_N = vf`` with terminal co-state ``lambda_N``."""
    table = _table(cfg, table)
    w = prob.weights
    status, at, v, lam, idx = kernels.sweep(table, prob.n, prob.vf, lambda_N, prob.delta_s,
                                            w.w_f, w.w_t, v_cap, v_floor, backend=backend)
    if status != kernels.OK:
        _raise_for(status, at, v[at])
    res = build_result(cfg, prob, table, v, lam, idx, lambda_N)
    res.error = prob.v0 - res.v[0]
    return res


class _Evaluator:
    """Sweeps for the bisection, keeping raw arrays so results are built lazily."""

    def __init__(self, cfg, prob, table, v_cap, v_floor, backend):
        self.cfg = cfg
        self.prob = prob
        self.table = table
        self.v_cap = v_cap
        self.v_floor = v_floor
        self.backend = backend
        self.best = None

    def __call__(self, lam_n):
        p = self.prob
        w = p.weights
        status, at, v, lam, idx = kernels.sweep(self.table, p.n, p.vf, lam_n, p.delta_s,
                                                w.w_f, w.w_t, self.v_cap, self.v_floor,
                                                backend=self.backend)
        if status == kernels.OK:
            err = p.v0 - v[0]
        elif status in (kernels.ABOVE_CAP, kernels.NO_MODE) and v[at] > p.v0:
            # v never decreases going backward, so the start velocity overshoots
            err = p.v0 - v[at]
        else:
            _raise_for(status, at, v[at])
        complete = status == kernels.OK
        if complete and (self.best is None or abs(err) < abs(self.best[0])):
            self.best = (err, lam_n, v, lam, idx)
        return err, complete, idx

    def result(self, entry):
        err, lam_n, v, lam, idx = entry
        res = build_result(self.cfg, self.prob, self.table, v, lam, idx, lam_n)
        res.error = err
        return res


def _first_difference(a, b):
    diff = np.nonzero(a != b)[0]
    return int(diff.max()) if diff.size else None


def solve_costate(cfg, prob, bracket=None, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL, *,
                  max_expand=8, v_cap=V_CAP, v_floor=V_FLOOR, raise_on_failure=True,
                  table=None, backend=None):
    """Bisect ``lambda_N`` until ``|v0 - v(s0)| <= tol``.

    The bracket is checked first: ``v(s0)`` must undershoot ``v0`` at the
    lower bound and overshoot it at the upper bound. Non-bracketing bounds are
    widened geometrically up to ``max_expand`` times. Bisection updates follow
    ``hi = sgn(e) max(sgn(e) hi, sgn(e) lam)`` and likewise for ``lo``.

    ``result.trace`` holds one record per evaluation with keys ``iteration``,
    ``lambda_N``, ``error``, ``lo`` and ``hi`` (bounds before the update).
    """
    table = _table(cfg, table)
    bracket = CostateBracket() if bracket is None else CostateBracket(bracket.lo, bracket.hi)
    ev = _Evaluator(cfg, prob, table, v_cap, v_floor, backend)
    trace = []

    lo, hi = bracket.lo, bracket.hi
    e_lo, ok_lo, idx_lo = ev(lo)
    e_hi, ok_hi, idx_hi = ev(hi)
    trace.append({"iteration": -1, "lambda_N": lo, "error": e_lo, "lo": lo, "hi": hi})
    trace.append({"iteration": -1, "lambda_N": hi, "error": e_hi, "lo": lo, "hi": hi})
    for attempt in range(max_expand):
        if e_lo > 0 or abs(e_lo) <= tol:
            break
        width = hi - lo
        hi, e_hi, idx_hi = lo, e_lo, idx_lo
        lo = lo - width
        e_lo, ok_lo, idx_lo = ev(lo)
        trace.append({"iteration": -1, "lambda_N": lo, "error": e_lo, "lo": lo, "hi": hi})
    for attempt in range(max_expand):
        if e_hi < 0 or abs(e_hi) <= tol:
            break
        width = hi - lo
        lo, e_lo, idx_lo = hi, e_hi, idx_hi
        hi = hi + width
        e_hi, ok_hi, idx_hi = ev(hi)
        trace.append({"iteration": -1, "lambda_N": hi, "error": e_hi, "lo": lo, "hi": hi})

    for e_end, ok_end in ((e_lo, ok_lo), (e_hi, ok_hi)):
        if ok_end and abs(e_end) <= tol:
            res = ev.result(ev.best)
            res.converged = True
            res.iterations = 0
            res.trace = trace
            return res
    if not (e_lo > 0 > e_hi):
        raise BracketNotSignChanging(
            f"boundary error does not change sign on [{lo:g}, {hi:g}] "
            f"(e_lo={e_lo:.4g}, e_hi={e_hi:.4g})")

    lam_n = 0.5 * (lo + hi)
    iterations = 0
    converged = False
    while iterations < max_iter:
        err, complete, idx = ev(lam_n)
        iterations += 1
        trace.append({"iteration": iterations, "lambda_N": lam_n, "error": err, "lo": lo, "hi": hi})
        if complete and abs(err) <= tol:
            converged = True
            break
        sgn = math.copysign(1.0, err)
        hi = sgn * max(sgn * hi, sgn * lam_n)
        lo = sgn * max(sgn * lo, sgn * lam_n)
        if err > 0:
            idx_lo = idx
        else:
            idx_hi = idx
        nxt = 0.5 * (lo + hi)
        if nxt == lo or nxt == hi:
            break
        lam_n = nxt

    res = ev.result(ev.best) if ev.best is not None else None
    if res is not None:
        res.converged = converged
        res.iterations = iterations
        res.trace = trace
    if not converged:
        sample = _first_difference(idx_lo, idx_hi)
        log.debug("bisection stalled: lo=%g hi=%g, mode switch at sample %s", lo, hi, sample)
        if raise_on_failure:
            where = f"; the start velocity jumps across v0 where the mode at sample {sample} switches" \
                if sample is not None else ""
            raise MaxIterationsExceeded(
                f"no terminal co-state meets |v0 - v(s0)| <= {tol} after {iterations} "
                f"iterations (best error {res.error if res else float('nan'):.4g} m/s){where}",
                result=res, sample=sample)
    return res


def cost_of(result, weights=None):
    """Discretised cost recomputed from the per-sample fuel and time arrays."""
    weights = weights or result.weights
    if len(result.fuel) != len(result.time) or len(result.fuel) != len(result.modes):
        raise ValidationError("result arrays have inconsistent lengths")
    return float(np.sum(weights.w_f * result.fuel + weights.w_t * result.time))


def smooth_modes(modes, min_run):
    """Run-length filter: absorb mode runs shorter than ``min_run`` samples into
    the preceding run. Off by default; the solver never calls it."""
    if min_run <= 1 or not modes:
        return list(modes)
    out = list(modes)
    i = 0
    while i < len(out):
        j = i
        while j < len(out) and out[j] == out[i]:
            j += 1
        if j - i < min_run and i > 0:
            out[i:j] = [out[i - 1]] * (j - i)
        i = j
    return out
