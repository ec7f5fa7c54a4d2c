"""Routes, velocity events and drive cycles.

Route files are plain text with ``#`` comments. A header row names each block::

    s_start_m, s_end_m, speed_limit_kmh
    0, 1500, 80
    ...
    trigger_m, horizon_m, v_entry_kmh, v_target_kmh
    500, 1000, 80, 60

Cycle files hold two columns ``t_s, v_kmh``. Speeds are converted to m/s on
load and back to km/h on save.
"""

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import DegenerateCycle, ParseError, ValidationError
from .solver import SegmentProblem

KMH = 1.0 / 3.6

SEGMENT_HEADER = ("s_start_m", "s_end_m", "speed_limit_kmh")
EVENT_HEADER = ("trigger_m", "horizon_m", "v_entry_kmh", "v_target_kmh")
CYCLE_HEADER = ("t_s", "v_kmh")


@dataclass(frozen=True)
class Segment:
    start: float
    end: float
    speed_limit: float


@dataclass(frozen=True)
class VelocityEvent:
    trigger_s: float
    horizon: float
    v_entry: float
    v_target: float

    def __post_init__(self):
        if not self.horizon > 0:
            raise ValidationError("event horizon must be positive")
        if not self.v_entry > self.v_target > 0:
            raise ValidationError("event needs v_entry > v_target > 0")

    @property
    def end_s(self):
        return self.trigger_s + self.horizon


@dataclass(frozen=True)
class RouteScenario:
    segments: tuple
    events: tuple = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "events", tuple(self.events))
        validate_route(self)

    @property
    def length(self):
        return self.segments[-1].end

    def speed_limit(self, s):
        """Limit in force at ``s``; segments are lower-inclusive, the last one closed."""
        for seg in self.segments:
            if seg.start <= s < seg.end:
                return seg.speed_limit
        if s == self.length:
            return self.segments[-1].speed_limit
        raise ValidationError(f"position {s} outside route [0, {self.length}]")


def validate_route(route):
    segs = route.segments
    if not segs:
        raise ValidationError("route needs at least one segment")
    if segs[0].start != 0:
        raise ValidationError("first segment must start at 0")
    for seg in segs:
        if not seg.end > seg.start:
            raise ValidationError(f"segment [{seg.start}, {seg.end}] has non-positive length")
        if not seg.speed_limit > 0:
            raise ValidationError("speed limits must be positive")
    for a, b in zip(segs, segs[1:]):
        if b.start != a.end:
            raise ValidationError(f"segments not contiguous at {a.end} / {b.start}")
    prev_end = -math.inf
    for ev in route.events:
        if ev.trigger_s < prev_end:
            raise ValidationError("events must be sorted by trigger position and not overlap")
        if ev.trigger_s < 0 or ev.end_s > route.length:
            raise ValidationError(f"event at {ev.trigger_s} m extends beyond the route")
        if ev.v_target > route.speed_limit(ev.end_s) + 1e-9:
            raise ValidationError(
                f"event at {ev.trigger_s} m targets {ev.v_target / KMH:.1f} km/h, above the "
                f"downstream limit {route.speed_limit(ev.end_s) / KMH:.1f} km/h")
        prev_end = ev.end_s


def _rows(text, path):
    """Yield ``(lineno, cells)`` for non-empty, non-comment lines."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if line:
            yield lineno, [c.strip() for c in line.split(",")]


def _floats(cells, path, lineno, width):
    if len(cells) != width:
        raise ParseError(f"expected {width} columns, got {len(cells)}", path, lineno)
    try:
        return [float(c) for c in cells]
    except ValueError:
        raise ParseError(f"not a number in {', '.join(cells)!r}", path, lineno) from None


def loads_route(text, path=None, name=""):
    segments, events = [], []
    block = None
    for lineno, cells in _rows(text, path):
        if tuple(cells) == SEGMENT_HEADER:
            block = "segments"
            continue
        if tuple(cells) == EVENT_HEADER:
            block = "events"
            continue
        if block is None:
            raise ParseError("data before a header row", path, lineno)
        if block == "segments":
            a, b, lim = _floats(cells, path, lineno, 3)
            segments.append(Segment(a, b, lim * KMH))
        else:
            trig, hor, ve, vt = _floats(cells, path, lineno, 4)
            try:
                events.append(VelocityEvent(trig, hor, ve * KMH, vt * KMH))
            except ValidationError as exc:
                raise ParseError(str(exc), path, lineno) from None
    return RouteScenario(segments=segments, events=events, name=name)


def _g(x):
    return format(x, ".10g")


def dumps_route(route):
    lines = [f"# route {route.name}".rstrip(), ", ".join(SEGMENT_HEADER)]
    lines += [f"{_g(s.start)}, {_g(s.end)}, {_g(s.speed_limit / KMH)}" for s in route.segments]
    lines.append(", ".join(EVENT_HEADER))
    lines += [f"{_g(e.trigger_s)}, {_g(e.horizon)}, {_g(e.v_entry / KMH)}, {_g(e.v_target / KMH)}"
              for e in route.events]
    return "\n".join(lines) + "\n"


def load_route(path):
    path = Path(path)
    return loads_route(path.read_text(), path=path, name=path.stem)


def save_route(route, path):
    Path(path).write_text(dumps_route(route))


def builtin_route(name="motorway_to_urban"):
    res = resources.files("ecodrive") / "data" / f"{name}.route"
    return loads_route(res.read_text(), path=name, name=name)


def events_to_problems(scenario, weights, n):
    """One segment problem per velocity event, all with ``n`` samples."""
    return [SegmentProblem(s0=e.trigger_s, sf=e.end_s, v0=e.v_entry, vf=e.v_target,
                           n=n, weights=weights)
            for e in scenario.events]


# -- drive cycles ------------------------------------------------------------

@dataclass(frozen=True)
class DriveCycle:
    t: np.ndarray
    v: np.ndarray
    name: str = ""

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.v, dtype=float)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "v", v)
        if t.ndim != 1 or t.shape != v.shape or len(t) < 2:
            raise ValidationError("cycle needs matching time and speed columns with >= 2 rows")
        if np.any(np.diff(t) <= 0):
            raise ValidationError("cycle time must be strictly increasing")
        if np.any(v < 0):
            raise ValidationError("cycle speed must be non-negative")

    def distance(self):
        """Cumulative distance at each sample (trapezoidal rule)."""
        return np.concatenate(([0.0], np.cumsum(0.5 * (self.v[1:] + self.v[:-1]) * np.diff(self.t))))


def loads_cycle(text, path=None, name=""):
    ts, vs = [], []
    for lineno, cells in _rows(text, path):
        if tuple(cells) == CYCLE_HEADER:
            continue
        t, v = _floats(cells, path, lineno, 2)
        ts.append(t)
        vs.append(v * KMH)
    try:
        return DriveCycle(np.array(ts), np.array(vs), name=name)
    except ValidationError as exc:
        raise ParseError(str(exc), path) from None


def dumps_cycle(cycle):
    lines = [f"# drive cycle {cycle.name}".rstrip(), ", ".join(CYCLE_HEADER)]
    lines += [f"{_g(t)}, {_g(v / KMH)}" for t, v in zip(cycle.t, cycle.v)]
    return "\n".join(lines) + "\n"


def load_cycle(path):
    path = Path(path)
    return loads_cycle(path.read_text(), path=path, name=path.stem)


def save_cycle(cycle, path):
    Path(path).write_text(dumps_cycle(cycle))


@dataclass(frozen=True)
class CycleSection:
    """A labelled stretch of a cycle; ``i0``/``i1`` are inclusive sample indices."""

    kind: str
    i0: int
    i1: int
    t_start: float
    t_end: float
    s_start: float
    s_end: float
    v_start: float
    v_end: float

    @property
    def length(self):
        return self.s_end - self.s_start

    @property
    def duration(self):
        return self.t_end - self.t_start


def _smooth(cycle, window):
    t, v = cycle.t, cycle.v
    if window <= 0:
        return v
    csum = np.concatenate(([0.0], np.cumsum(v)))
    lo = np.searchsorted(t, t - window / 2, side="left")
    hi = np.searchsorted(t, t + window / 2, side="right")
    return (csum[hi] - csum[lo]) / (hi - lo)


def segment_cycle(cycle, accel_threshold=0.05, min_section_length=50.0, smoothing=5.0):
    """Split a cycle into acceleration, cruising and deceleration sections.

    Each interval between samples is labelled from the smoothed acceleration;
    runs shorter than ``min_section_length`` are merged into the preceding
    section (the following one at the start of the cycle).
    """
    s = cycle.distance()
    if s[-1] < min_section_length:
        raise DegenerateCycle(
            f"cycle covers {s[-1]:.1f} m, below the minimum section length {min_section_length} m")
    vs = _smooth(cycle, smoothing)
    acc = np.diff(vs) / np.diff(cycle.t)
    labels = np.where(acc > accel_threshold, "acceleration",
                      np.where(acc < -accel_threshold, "deceleration", "cruising"))

    # runs of equal label as [first interval, last interval]
    runs = []
    start = 0
    for i in range(1, len(labels) + 1):
        if i == len(labels) or labels[i] != labels[start]:
            runs.append([str(labels[start]), start, i - 1])
            start = i

    def run_len(r):
        return s[r[2] + 1] - s[r[1]]

    changed = True
    while changed and len(runs) > 1:
        changed = False
        for idx, r in enumerate(runs):
            if run_len(r) < min_section_length:
                if idx > 0:
                    runs[idx - 1][2] = r[2]
                else:
                    runs[1][1] = r[1]
                del runs[idx]
                changed = True
                break
        merged = [runs[0]]
        for r in runs[1:]:
            if r[0] == merged[-1][0]:
                merged[-1][2] = r[2]
            else:
                merged.append(r)
        runs = merged

    t, v = cycle.t, cycle.v
    return [CycleSection(kind=k, i0=a, i1=b + 1, t_start=t[a], t_end=t[b + 1],
                         s_start=s[a], s_end=s[b + 1], v_start=v[a], v_end=v[b + 1])
            for k, a, b in runs]


def sections_to_events(sections, min_drop=5.0 * KMH, min_target=10.0 * KMH):
    """Deceleration sections usable as advice events, keyed by section index."""
    out = {}
    for i, sec in enumerate(sections):
        if sec.kind != "deceleration":
            continue
        if sec.v_end >= min_target and sec.v_start - sec.v_end >= min_drop:
            out[i] = VelocityEvent(sec.s_start, sec.length, sec.v_start, sec.v_end)
    return out


# Level ranges [km/h], hold times [s], ramp rates [m/s^2] and minimum level change [km/h]
_CYCLE_STYLES = {
    "rural": dict(levels=(40.0, 85.0), hold=(8.0, 30.0), acc=(0.25, 0.5), dec=(0.08, 0.2),
                  min_change=15.0, start=60.0),
    "motorway": dict(levels=(72.0, 90.0), hold=(40.0, 120.0), acc=(0.1, 0.25), dec=(0.1, 0.3),
                     min_change=4.0, start=85.0),
}


def synthetic_cycle(part="rural", seed=0, duration=600.0, dt=1.0):
    """ETC-like speed trace built from random hold/ramp phases.

    ``rural`` alternates speed levels often and by large steps; ``motorway``
    holds high speeds for long stretches with small adjustments.
    """
    if part not in _CYCLE_STYLES:
        raise ValidationError(f"unknown cycle part {part!r}; choose from {sorted(_CYCLE_STYLES)}")
    style = _CYCLE_STYLES[part]
    rng = np.random.default_rng(seed)
    lo, hi = style["levels"]
    v = style["start"] * KMH
    speeds = [v]
    t = 0.0
    while t < duration:
        hold = rng.uniform(*style["hold"])
        n_hold = max(1, int(round(hold / dt)))
        speeds += [v] * n_hold
        t += n_hold * dt
        while True:
            target = rng.uniform(lo, hi) * KMH
            if abs(target - v) >= style["min_change"] * KMH:
                break
        rate = rng.uniform(*(style["acc"] if target > v else style["dec"]))
        n_ramp = max(1, int(math.ceil(abs(target - v) / (rate * dt))))
        speeds += list(np.linspace(v, target, n_ramp + 1)[1:])
        t += n_ramp * dt
        v = target
    n = int(round(duration / dt)) + 1
    speeds = np.array(speeds[:n])
    return DriveCycle(t=dt * np.arange(len(speeds)), v=speeds, name=f"synthetic_{part}_{seed}")
