"""Forward longitudinal simulation, advice dispatch and the baseline driver.

Each step integrates ``dv/ds = f(v)`` with the relation the solver uses,
``v_prev = v_next - f(v_next) ds``. Going forward this is implicit in
``v_next`` and is solved with Newton's method, so replaying a solved mode
sequence with one substep per sample reproduces the solver's velocities.
Fuel and time for a substep are charged at its end velocity, as in the
solver's cost sum.

The baseline driver cruises at the speed limit in its most economical gear
and engine-brakes in the highest usable gear, starting as late as possible to
meet the next lower limit or event target.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    EcoDriveError,
    MissingSolution,
    ValidationError,
    VelocityFloorBreach,
)
from .route import RouteScenario, Segment, VelocityEvent, sections_to_events, segment_cycle
from .solver import CostWeights, SegmentProblem, solve_costate
from .vehicle import DrivingMode, ModeKind, mode_feasible

V_FLOOR = 0.5
EPS_S = 1e-9
# longest advice sample [m]; slower events get shorter samples from sample_length_for
SAMPLE_LENGTH = 0.25
# allowed one-sample gap [m/s] between the solver relation and a finely substepped step
STEP_ERROR_BUDGET = 5e-4


@dataclass(frozen=True)
class SimState:
    s: float
    v: float
    gear: int = 0
    mode: object = None
    fuel_total: float = 0.0
    time_total: float = 0.0


class Dynamics:
    """Scalar per-mode dynamics with constants cached from a config."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.a = cfg.drag_factor
        self.b = cfg.rolling_force
        self.r2 = cfg.wheel_radius ** 2
        self._cache = {}

    def _consts(self, mode):
        c = self._cache.get(mode)
        if c is None:
            cfg = self.cfg
            if mode.kind == ModeKind.ECO_ROLL:
                c = (0.0, 0.0, self.r2 / cfg.effective_inertia(mode), 0.0)
            else:
                extra = cfg.brake_torque if mode.kind == ModeKind.ENGINE_BRAKE else 0.0
                c = (cfg.speed_factor(mode.gear), cfg.wheel_torque_factor(mode.gear),
                     self.r2 / cfg.effective_inertia(mode), extra)
            self._cache[mode] = c
        return c

    def f(self, mode, v):
        """``(dv/ds, d(dv/ds)/dv)`` at ``v``."""
        if mode.kind == ModeKind.CRUISING:
            return 0.0, 0.0
        c, k, q, extra = self._consts(mode)
        a, b = self.a, self.b
        if mode.kind == ModeKind.ECO_ROLL:
            num = a * v * v + b
            return -q * num / v, -q * (a * v * v - b) / (v * v)
        g0, g1 = self.cfg.gamma
        num = k * (g0 + g1 * c * v + extra) + a * v * v + b
        dnum = k * g1 * c + 2.0 * a * v
        return -q * num / v, -q * (dnum * v - num) / (v * v)

    def fuel_rate(self, mode, v):
        cfg = self.cfg
        if mode.kind == ModeKind.ECO_ROLL:
            return cfg.mdot_idle
        if mode.kind != ModeKind.CRUISING:
            return 0.0
        c, k, _, _ = self._consts(mode)
        omega = c * v
        torque = (self.a * v * v + self.b) / k
        b0, b1, b2, b3, b4, b5 = cfg.beta
        return b0 + b1 * omega + b2 * torque + b3 * omega * omega + b4 * omega * torque + b5 * torque * torque

    def omega(self, mode, v):
        if mode.kind == ModeKind.ECO_ROLL:
            return self.cfg.omega_idle
        return self._consts(mode)[0] * v

    def in_band(self, gear, v):
        env = self.cfg.envelope
        w = self.cfg.speed_factor(gear) * v
        return env.omega_min <= w <= env.omega_max

    def brake_gear(self, v):
        """Highest gear whose engine speed is inside the band (lowest gear if none)."""
        for y in range(self.cfg.n_gears, 0, -1):
            if self.in_band(y, v):
                return y
        return 1

    def cruise_gear(self, v):
        """Feasible gear with the lowest cruising fuel rate (highest in-band gear as fallback)."""
        cfg = self.cfg
        best, best_rate = None, math.inf
        for y in range(cfg.n_gears, 0, -1):
            if not self.in_band(y, v):
                continue
            mode = DrivingMode.cruising(y)
            torque = (self.a * v * v + self.b) / cfg.wheel_torque_factor(y)
            if torque > cfg.envelope.max_torque(self.omega(mode, v)):
                continue
            rate = self.fuel_rate(mode, v)
            if rate < best_rate - 1e-12:
                best, best_rate = y, rate
        return best if best is not None else self.brake_gear(v)

    def traction(self, v, accel):
        """Gear and fuel rate [g/s] for quasi-static driving at ``v`` with ``accel``."""
        cfg = self.cfg
        if v < V_FLOOR:
            return 0, cfg.mdot_idle
        best, best_rate = None, math.inf
        for y in range(cfg.n_gears, 0, -1):
            if not self.in_band(y, v):
                continue
            m_eff = cfg.mass + cfg.powertrain_inertia[y - 1] / self.r2
            force = m_eff * accel + self.a * v * v + self.b
            if force <= 0:
                # overrun: fuel cut while the engine is dragged along
                return y, 0.0
            torque = force / cfg.wheel_torque_factor(y)
            omega = cfg.speed_factor(y) * v
            if torque > cfg.envelope.max_torque(omega):
                continue
            b0, b1, b2, b3, b4, b5 = cfg.beta
            rate = b0 + b1 * omega + b2 * torque + b3 * omega * omega + b4 * omega * torque + b5 * torque * torque
            rate = max(rate, cfg.mdot_idle)
            if rate < best_rate:
                best, best_rate = y, rate
        if best is None:
            # below the band in every gear (crawling) or torque-limited: clutch slips in gear 1
            y = 1
            m_eff = cfg.mass + cfg.powertrain_inertia[0] / self.r2
            force = max(m_eff * accel + self.a * v * v + self.b, 0.0)
            torque = force / cfg.wheel_torque_factor(y)
            omega = max(cfg.speed_factor(y) * v, cfg.omega_idle)
            b0, b1, b2, b3, b4, b5 = cfg.beta
            rate = b0 + b1 * omega + b2 * torque + b3 * omega * omega + b4 * omega * torque + b5 * torque * torque
            return y, max(rate, cfg.mdot_idle)
        return best, best_rate


def _implicit(dyn, mode, v, h):
    """Solve ``x - f(x) h = v`` for ``x`` (``x <= v`` for decelerating modes)."""
    f0, _ = dyn.f(mode, v)
    x = v + f0 * h
    if x <= 0:
        x = 0.5 * v
    for _ in range(50):
        f, df = dyn.f(mode, x)
        r = x - f * h - v
        step = r / (1.0 - df * h)
        x_new = x - step
        if x_new <= 0:
            x_new = 0.5 * x
        if abs(x_new - x) <= 1e-14 * max(1.0, abs(x)):
            x = x_new
            break
        x = x_new
    return x


def step(cfg, state, mode, delta_s, substeps=1, dynamics=None, v_floor=V_FLOOR):
    """Advance ``state`` by ``delta_s`` metres in ``mode``."""
    if not delta_s > 0:
        raise ValidationError("delta_s must be positive")
    dyn = dynamics or Dynamics(cfg)
    h = delta_s / substeps
    v = state.v
    fuel = state.fuel_total
    time = state.time_total
    for _ in range(substeps):
        v = v if mode.kind == ModeKind.CRUISING else _implicit(dyn, mode, v, h)
        if not v >= v_floor:
            raise VelocityFloorBreach(state.s + delta_s, v)
        fuel += dyn.fuel_rate(mode, v) * h / v
        time += h / v
    return SimState(s=state.s + delta_s, v=v, gear=mode.gear, mode=mode,
                    fuel_total=fuel, time_total=time)


def accelerate(cfg, state, accel, delta_s, substeps=1, dynamics=None):
    """Quasi-static acceleration at ``accel`` m/s^2 (traction is not a solver mode)."""
    dyn = dynamics or Dynamics(cfg)
    h = delta_s / substeps
    v = state.v
    fuel = state.fuel_total
    time = state.time_total
    gear = state.gear
    for _ in range(substeps):
        # dv/ds = accel / v, implicit: x^2 - v x - accel h = 0
        x = 0.5 * (v + math.sqrt(v * v + 4.0 * accel * h))
        gear, rate = dyn.traction(x, accel)
        fuel += rate * h / x
        time += h / x
        v = x
    return SimState(s=state.s + delta_s, v=v, gear=gear, mode=None,
                    fuel_total=fuel, time_total=time)


# -- advice finite-state machine ----------------------------------------------

@dataclass(frozen=True)
class AdviceFsm:
    """``state`` is ``idle``, ``advising`` or ``cruising``.

    Edges: idle -> advising at an event trigger; advising -> cruising when the
    target velocity is reached early or the speed limit is exceeded; advising
    or cruising -> idle at the event end.
    """

    enabled: bool = True
    state: str = "idle"
    event: int = -1
    cursor: int = 0
    v_set: float = 0.0
    speed_limit_active: float = math.inf
    handled: frozenset = frozenset()
    hysteresis: float = 0.0


def _sample_index(result, s):
    ds = result.s[1] - result.s[0]
    k = int(math.floor((s - result.s[0]) / ds + 1e-9))
    return min(max(k, 0), result.n - 1)


def fsm_advance(fsm, state, scenario, solutions, dynamics):
    """One dispatch decision at ``state``.

    Returns ``(fsm, mode)`` where ``mode`` is None while idle, meaning the
    driver model is in control.
    """
    s, v = state.s, state.v
    limit = scenario.speed_limit(min(s, scenario.length))
    fsm = replace(fsm, speed_limit_active=limit)
    if fsm.state == "idle":
        if not fsm.enabled:
            return fsm, None
        for i, ev in enumerate(scenario.events):
            if i in fsm.handled:
                continue
            if ev.trigger_s - EPS_S <= s < ev.end_s - EPS_S:
                if i not in solutions:
                    raise MissingSolution(f"event {i} at {ev.trigger_s} m triggered without a solution")
                fsm = replace(fsm, state="advising", event=i, cursor=0)
                break
        else:
            return fsm, None

    ev = scenario.events[fsm.event]
    if s >= ev.end_s - EPS_S:
        return replace(fsm, state="idle", event=-1, cursor=0,
                       handled=fsm.handled | {fsm.event}), None
    if fsm.state == "advising":
        if v <= ev.v_target + 1e-9:
            fsm = replace(fsm, state="cruising", v_set=ev.v_target)
        elif v > limit + fsm.hysteresis:
            fsm = replace(fsm, state="cruising", v_set=limit)
        else:
            result = solutions[fsm.event]
            k = _sample_index(result, s)
            return replace(fsm, cursor=k), result.modes[k]
    return fsm, DrivingMode.cruising(dynamics.cruise_gear(min(v, fsm.v_set)))


# -- baseline driver ------------------------------------------------------------

@dataclass
class BrakingCurve:
    """Latest engine-braking approach to ``(s_target, v_target)``.

    ``v_at(s)`` is the highest velocity at ``s`` from which braking in the
    highest usable gear still reaches the target; inf where the curve exceeds
    any velocity of interest.
    """

    s_target: float
    v_target: float
    s: np.ndarray
    v: np.ndarray

    @classmethod
    def build(cls, dyn, s_target, v_target, h=1.0, v_max=40.0):
        s_pts, v_pts = [s_target], [v_target]
        v = v_target
        s = s_target
        while v < v_max and s > -h:
            mode = DrivingMode.engine_brake(dyn.brake_gear(v))
            f, _ = dyn.f(mode, v)
            v = v - f * h
            s = s - h
            s_pts.append(s)
            v_pts.append(v)
        return cls(s_target, v_target, np.array(s_pts[::-1]), np.array(v_pts[::-1]))

    def v_at(self, s):
        if s >= self.s_target:
            return self.v_target
        if s < self.s[0]:
            return math.inf
        return float(np.interp(s, self.s, self.v))


class BaselineDriver:
    """Speed-limit cruising with latest possible engine braking.

    Below the limit (by more than ``deadband``) the truck accelerates at
    ``accel``; above a braking curve it engine-brakes until the curve's
    target velocity or position is reached.
    """

    def __init__(self, cfg, scenario, step=1.0, accel=0.4, deadband=0.1, dynamics=None):
        self.cfg = cfg
        self.scenario = scenario
        self.dyn = dynamics or Dynamics(cfg)
        self.accel = accel
        self.deadband = deadband
        targets = {}
        segs = scenario.segments
        for prev, nxt in zip(segs, segs[1:]):
            if nxt.speed_limit < prev.speed_limit:
                targets[nxt.start] = min(targets.get(nxt.start, math.inf), nxt.speed_limit)
        for ev in scenario.events:
            targets[ev.end_s] = min(targets.get(ev.end_s, math.inf), ev.v_target)
        self.curves = [BrakingCurve.build(self.dyn, s, v, h=step) for s, v in sorted(targets.items())]
        self.braking = None

    def reset(self):
        self.braking = None

    def command(self, s, v, h):
        """Action for the next ``h`` metres.

        One of ``("brake", mode)``, ``("cruise", mode)`` or ``("accel", None)``.
        """
        if self.braking is not None:
            c = self.braking
            if v > c.v_target + 1e-9 and s < c.s_target - EPS_S:
                return "brake", DrivingMode.engine_brake(self.dyn.brake_gear(v))
            self.braking = None
        for c in self.curves:
            if c.s_target <= s + EPS_S:
                continue
            if v > c.v_target + 1e-9 and v > c.v_at(s + h) + 1e-12:
                self.braking = c
                return "brake", DrivingMode.engine_brake(self.dyn.brake_gear(v))
        limit = self.scenario.speed_limit(min(s, self.scenario.length))
        if v < limit - self.deadband:
            return "accel", None
        return "cruise", DrivingMode.cruising(self.dyn.cruise_gear(v))


# -- trips ----------------------------------------------------------------------

@dataclass
class SectionRecord:
    name: str
    s_start: float
    s_end: float
    time: float = 0.0
    fuel: float = 0.0


TRACE_HEADER = ("s_m", "t_s", "v_ms", "gear", "mode", "fuel_g_cum")


@dataclass
class TripReport:
    """Per-section and route totals for one run; relative figures need ``baseline``."""

    label: str
    sections: list
    route_time: float
    route_fuel: float
    phi: float = math.nan
    trace: list = field(default_factory=list)
    baseline: "TripReport" = None

    def time_incr_pct(self, i=None):
        if self.baseline is None:
            return 0.0
        mine = self.route_time if i is None else self.sections[i].time
        base = self.baseline.route_time if i is None else self.baseline.sections[i].time
        return 100.0 * (mine - base) / base

    def fuel_saved_pct(self, i=None):
        if self.baseline is None:
            return 0.0
        mine = self.route_fuel if i is None else self.sections[i].fuel
        base = self.baseline.route_fuel if i is None else self.baseline.sections[i].fuel
        return 100.0 * (base - mine) / base


def _mode_label(mode):
    return "tr" if mode is None else str(mode)


def sample_length_for(cfg, v_lo, v_hi, budget=STEP_ERROR_BUDGET, cap=SAMPLE_LENGTH, dynamics=None):
    """Longest sample [m] whose one-step truncation stays within ``budget`` on ``[v_lo, v_hi]``.

    The solver relation and the exact flow of ``dv/ds = f(v)`` part by about
    ``|f f'| ds^2 / 2`` per sample, which grows quickly at low speed.
    """
    dyn = dynamics or Dynamics(cfg)
    worst = 0.0
    for v in np.linspace(v_lo, v_hi, 16):
        for mode in cfg.modes():
            if mode.kind != ModeKind.CRUISING and mode_feasible(cfg, mode, v):
                f, df = dyn.f(mode, v)
                worst = max(worst, abs(f * df))
    if worst == 0.0:
        return cap
    return min(cap, math.sqrt(2.0 * budget / worst))


def event_samples(cfg, horizon, v_entry, v_target, sample_length=None, dynamics=None):
    """Sample count for one event; ``sample_length=None`` picks it from :func:`sample_length_for`."""
    if sample_length is None:
        sample_length = sample_length_for(cfg, v_target, v_entry, dynamics=dynamics)
    return max(2, int(math.ceil(horizon / sample_length - 1e-9)))


def solve_scenario(cfg, scenario, weights, sample_length=None, **solve_kw):
    """Solve every event of ``scenario``; see :func:`event_samples` for the sample count."""
    out = {}
    for i, ev in enumerate(scenario.events):
        n = event_samples(cfg, ev.horizon, ev.v_entry, ev.v_target, sample_length)
        prob = SegmentProblem(s0=ev.trigger_s, sf=ev.end_s, v0=ev.v_entry, vf=ev.v_target,
                              n=n, weights=weights)
        out[i] = solve_costate(cfg, prob, **solve_kw)
    return out


def run_trip(cfg, scenario, solutions=None, ed_enabled=True, *, step_length=1.0, substeps=10,
             v_start=None, record_trace=False, baseline=None, phi=math.nan):
    """Drive ``scenario`` once and account fuel and time per event section.

    With ``ed_enabled`` the advice in ``solutions`` (event index -> solved
    profile) is followed inside each event; otherwise the baseline driver
    runs the whole route. An enabled run also computes (or reuses) the
    disabled run as its ``baseline``.
    """
    solutions = solutions or {}
    dyn = Dynamics(cfg)
    driver = BaselineDriver(cfg, scenario, step=step_length, dynamics=dyn)
    fsm = AdviceFsm(enabled=ed_enabled)
    v0 = scenario.speed_limit(0.0) if v_start is None else v_start
    state = SimState(s=0.0, v=v0)
    length = scenario.length

    sections = [SectionRecord(f"event{i + 1}", ev.trigger_s, ev.end_s)
                for i, ev in enumerate(scenario.events)]
    stops = sorted({0.0, length}
                   | {seg.start for seg in scenario.segments}
                   | {ev.trigger_s for ev in scenario.events}
                   | {ev.end_s for ev in scenario.events})
    trace = []
    if record_trace:
        trace.append((state.s, state.time_total, state.v, 0, "tr", 0.0))

    while state.s < length - EPS_S:
        s = state.s
        next_stop = next(x for x in stops if x > s + EPS_S)
        h = min(step_length, next_stop - s)
        fsm, mode = fsm_advance(fsm, state, scenario, solutions, dyn)
        if mode is not None:
            if fsm.state == "advising":
                res = solutions[fsm.event]
                h = min(res.s[fsm.cursor + 1] - s, next_stop - s)
                if h <= EPS_S:
                    h = min(step_length, next_stop - s)
            elif state.v > fsm.v_set:
                # early termination on a limit breach: settle at the set speed
                state = replace(state, v=fsm.v_set)
            new = step(cfg, state, mode, h, substeps, dyn)
        else:
            action, mode = driver.command(s, state.v, h)
            if action == "accel":
                limit = scenario.speed_limit(s)
                # do not overshoot the limit within this step
                a = min(driver.accel, max((limit * limit - state.v * state.v) / (2.0 * h), 0.0))
                new = accelerate(cfg, state, a, h, substeps, dyn)
            else:
                new = step(cfg, state, mode, h, substeps, dyn)
        limit = scenario.speed_limit(min(new.s, length))
        if new.v > limit + fsm.hysteresis:
            # limit crossing: immediate clamp (service brake, no fuel)
            new = replace(new, v=limit)
        for sec in sections:
            if sec.s_start - EPS_S <= s and new.s <= sec.s_end + EPS_S:
                sec.time += new.time_total - state.time_total
                sec.fuel += new.fuel_total - state.fuel_total
        state = new
        if record_trace:
            trace.append((state.s, state.time_total, state.v, state.gear,
                          _mode_label(mode), state.fuel_total))

    report = TripReport(label="enabled" if ed_enabled else "disabled", sections=sections,
                        route_time=state.time_total, route_fuel=state.fuel_total,
                        phi=phi, trace=trace)
    if ed_enabled:
        report.baseline = baseline or run_trip(cfg, scenario, None, False, step_length=step_length,
                                               substeps=substeps, v_start=v_start)
    return report



def replay(cfg, result, substeps=1):
    """Open-loop replay of a solved profile; returns boundary velocities."""
    dyn = Dynamics(cfg)
    v = np.empty(result.n + 1)
    v[0] = result.v[0]
    state = SimState(s=result.s[0], v=result.v[0])
    for k, mode in enumerate(result.modes):
        state = step(cfg, state, mode, result.s[k + 1] - result.s[k], substeps, dyn)
        v[k + 1] = state.v
    return v


def one_step_deviation(cfg, result, substeps=10):
    """Largest gap between a per-sample forward step from the solved velocity
    and the solved velocity at the next boundary."""
    dyn = Dynamics(cfg)
    worst = 0.0
    for k, mode in enumerate(result.modes):
        st = SimState(s=result.s[k], v=result.v[k])
        nxt = step(cfg, st, mode, result.s[k + 1] - result.s[k], substeps, dyn)
        worst = max(worst, abs(nxt.v - result.v[k + 1]))
    return worst


# -- drive-cycle assessment -------------------------------------------------------

def track_cycle_span(cfg, cycle, i0, i1, dynamics=None):
    """Quasi-static fuel [g] and time [s] for following the cycle from sample ``i0`` to ``i1``."""
    dyn = dynamics or Dynamics(cfg)
    fuel = 0.0
    for j in range(i0, i1):
        dt = cycle.t[j + 1] - cycle.t[j]
        va, vb = cycle.v[j], cycle.v[j + 1]
        _, rate = dyn.traction(0.5 * (va + vb), (vb - va) / dt)
        fuel += rate * dt
    return fuel, float(cycle.t[i1] - cycle.t[i0])


@dataclass
class CycleRun:
    """One pass over a cycle; totals are sums over ``sections``."""

    label: str
    sections: list
    phi: float = math.nan
    advised: int = 0
    skipped: int = 0

    @property
    def time(self):
        return sum(r.time for r in self.sections)

    @property
    def fuel(self):
        return sum(r.fuel for r in self.sections)


@dataclass
class CycleReport:
    """Totals for the disabled run and one enabled run per cost weighting."""

    cycle_name: str
    distance: float
    decel_share: float
    n_sections: int
    n_events: int
    disabled: CycleRun
    enabled: list

    def time_incr_pct(self, run):
        return 100.0 * (run.time - self.disabled.time) / self.disabled.time

    def fuel_saved_pct(self, run):
        return 100.0 * (self.disabled.fuel - run.fuel) / self.disabled.fuel


def assess_cycle(cfg, cycle, phis, *, sample_length=None, w_f=1.0, substeps=10,
                 sections=None, solve_kw=None):
    """Fuel and time over a cycle with advice disabled and enabled.

    Non-deceleration stretches are followed quasi-statically and are
    identical in both runs. Each usable deceleration section becomes a
    single-event route driven by the baseline driver (disabled) or by the
    advice (enabled). If no advice converges for a section the enabled run
    falls back to the baseline there.
    """
    solve_kw = dict(solve_kw or {})
    dyn = Dynamics(cfg)
    sections = sections if sections is not None else segment_cycle(cycle)
    events = sections_to_events(sections)

    def record(i, time, fuel):
        sec = sections[i]
        return SectionRecord(f"{sec.kind}{i + 1}", sec.s_start, sec.s_end, time, fuel)

    fixed = {}
    minis = {}
    for i, sec in enumerate(sections):
        if i in events:
            ev = events[i]
            mini = RouteScenario(segments=(Segment(0.0, ev.horizon, ev.v_entry),),
                                 events=(VelocityEvent(0.0, ev.horizon, ev.v_entry, ev.v_target),))
            minis[i] = (mini, run_trip(cfg, mini, None, False, substeps=substeps))
        else:
            fuel, time = track_cycle_span(cfg, cycle, sec.i0, sec.i1, dyn)
            fixed[i] = (time, fuel)

    def assemble(label, chosen, **kw):
        recs = []
        for i in range(len(sections)):
            if i in fixed:
                recs.append(record(i, *fixed[i]))
            else:
                rep = chosen[i]
                recs.append(record(i, rep.route_time, rep.route_fuel))
        return CycleRun(label, recs, **kw)

    disabled = assemble("disabled", {i: base for i, (_, base) in minis.items()})
    runs = []
    for phi in phis:
        weights = CostWeights.from_phi(phi, w_f)
        chosen = {}
        advised = skipped = 0
        for i, (mini, base) in minis.items():
            try:
                sol = solve_scenario(cfg, mini, weights, sample_length, **solve_kw)
                chosen[i] = run_trip(cfg, mini, sol, True, substeps=substeps, baseline=base)
                advised += 1
            except EcoDriveError:
                chosen[i] = base
                skipped += 1
        runs.append(assemble("enabled", chosen, phi=phi, advised=advised, skipped=skipped))

    total = float(cycle.distance()[-1])
    decel = sum(sections[i].length for i in events)
    return CycleReport(cycle_name=cycle.name, distance=total,
                       decel_share=float(decel / total) if total > 0 else 0.0,
                       n_sections=len(sections), n_events=len(events),
                       disabled=disabled, enabled=runs)
