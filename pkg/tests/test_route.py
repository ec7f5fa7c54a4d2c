import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecodrive.errors import DegenerateCycle, ParseError, ValidationError
from ecodrive.route import (
    DriveCycle,
    RouteScenario,
    Segment,
    VelocityEvent,
    dumps_cycle,
    dumps_route,
    events_to_problems,
    load_cycle,
    loads_cycle,
    loads_route,
    save_cycle,
    sections_to_events,
    segment_cycle,
    synthetic_cycle,
)
from ecodrive.solver import CostWeights

KMH = 1.0 / 3.6
W15 = CostWeights.from_phi(15)


class TestShippedRoute:
    def test_layout(self, route):
        assert route.length == 4500.0
        assert len(route.events) == 3
        for ev in route.events:
            assert ev.horizon == 1000.0
            assert (ev.v_entry - ev.v_target) / KMH == pytest.approx(20.0)

    def test_limits(self, route):
        assert route.speed_limit(0.0) == pytest.approx(80 * KMH)
        # segments are lower-inclusive
        assert route.speed_limit(1500.0) == pytest.approx(60 * KMH)
        assert route.speed_limit(4500.0) == pytest.approx(40 * KMH)
        with pytest.raises(ValidationError):
            route.speed_limit(4500.5)

    def test_roundtrip(self, route):
        again = loads_route(dumps_route(route), name=route.name)
        assert again == route


class TestValidation:
    def test_empty(self):
        with pytest.raises(ValidationError):
            RouteScenario(segments=())

    def test_gap(self):
        with pytest.raises(ValidationError):
            RouteScenario(segments=(Segment(0, 100, 20), Segment(110, 200, 20)))

    def test_target_above_downstream_limit(self):
        with pytest.raises(ValidationError):
            RouteScenario(segments=(Segment(0, 1000, 20.0), Segment(1000, 2000, 10.0)),
                          events=(VelocityEvent(0.0, 1000.0, 20.0, 15.0),))

    def test_overlapping_events(self):
        with pytest.raises(ValidationError):
            RouteScenario(segments=(Segment(0, 3000, 25.0),),
                          events=(VelocityEvent(0, 1000, 20, 15), VelocityEvent(500, 1000, 20, 15)))

    def test_event_needs_a_drop(self):
        with pytest.raises(ValidationError):
            VelocityEvent(0.0, 100.0, 10.0, 12.0)

    def test_parse_error_has_line(self):
        text = "s_start_m, s_end_m, speed_limit_kmh\n0, 100, 50\n100, abc, 30\n"
        with pytest.raises(ParseError) as info:
            loads_route(text)
        assert info.value.line == 3

    def test_data_before_header(self):
        with pytest.raises(ParseError):
            loads_route("0, 100, 50\n")


class TestProblems:
    def test_one_per_event(self, route):
        probs = events_to_problems(route, W15, 200)
        assert len(probs) == 3
        for p, ev in zip(probs, route.events):
            assert p.sf - p.s0 == 1000.0
            assert p.n == 200 and p.delta_s == 5.0
            assert (p.v0, p.vf) == (ev.v_entry, ev.v_target)

    def test_no_events(self):
        r = RouteScenario(segments=(Segment(0, 500, 20.0),))
        assert events_to_problems(r, W15, 50) == []


def trapezoid(accel=0.5, v_top=20.0, hold=60.0, dt=0.5):
    """0 -> v_top at +accel, hold, back to 0 at -accel."""
    t_ramp = v_top / accel
    t = np.arange(0.0, 2 * t_ramp + hold + dt / 2, dt)
    v = np.minimum.reduce([accel * t, np.full_like(t, v_top), accel * (t[-1] - t)])
    return DriveCycle(t, v), t_ramp, hold


class TestSegmentation:
    def test_constant_speed(self):
        t = np.arange(0.0, 300.0)
        sections = segment_cycle(DriveCycle(t, np.full_like(t, 20.0)))
        assert [s.kind for s in sections] == ["cruising"]

    def test_trapezoid_breakpoints(self):
        cycle, t_ramp, hold = trapezoid()
        sections = segment_cycle(cycle, smoothing=0.0)
        assert [s.kind for s in sections] == ["acceleration", "cruising", "deceleration"]
        a, c, d = sections
        assert a.t_end == pytest.approx(t_ramp)
        assert c.t_end == pytest.approx(t_ramp + hold)
        # distances by hand: ramps cover v^2 / (2 a), the hold v * hold
        assert a.length == pytest.approx(20.0 ** 2 / (2 * 0.5))
        assert c.length == pytest.approx(20.0 * hold)
        assert d.length == pytest.approx(400.0)

    def test_sections_tile_the_cycle(self):
        cycle = synthetic_cycle("rural", seed=3)
        sections = segment_cycle(cycle)
        assert sections[0].i0 == 0 and sections[-1].i1 == len(cycle.t) - 1
        for a, b in zip(sections, sections[1:]):
            assert a.i1 == b.i0
        assert sum(s.length for s in sections) == pytest.approx(cycle.distance()[-1])

    def test_short_cycle(self):
        with pytest.raises(DegenerateCycle):
            segment_cycle(DriveCycle([0.0, 1.0, 2.0], [1.0, 1.0, 1.0]))

    def test_events_from_deceleration_only(self):
        cycle, _, _ = trapezoid(v_top=20.0)
        sections = segment_cycle(cycle, smoothing=0.0)
        # the final stop falls below the minimum target speed
        assert sections_to_events(sections) == {}
        sections = segment_cycle(synthetic_cycle("rural", seed=0))
        events = sections_to_events(sections)
        assert events
        for i, ev in events.items():
            assert sections[i].kind == "deceleration"
            assert ev.v_entry > ev.v_target >= 10 * KMH


class TestSyntheticCycles:
    def test_deterministic(self):
        a, b = synthetic_cycle("rural", seed=7), synthetic_cycle("rural", seed=7)
        np.testing.assert_array_equal(a.v, b.v)

    def test_rural_deceleration_share(self):
        shares = []
        for seed in range(5):
            cycle = synthetic_cycle("rural", seed=seed)
            sections = segment_cycle(cycle)
            events = sections_to_events(sections)
            shares.append(sum(sections[i].length for i in events) / cycle.distance()[-1])
        assert np.mean(shares) == pytest.approx(0.457, abs=0.1)

    def test_rural_has_more_deceleration_than_motorway(self):
        def share(part):
            c = synthetic_cycle(part, seed=0)
            s = segment_cycle(c)
            return sum(s[i].length for i in sections_to_events(s)) / c.distance()[-1]
        assert share("rural") > share("motorway")

    def test_unknown_part(self):
        with pytest.raises(ValidationError):
            synthetic_cycle("urban")

    def test_file_roundtrip(self, tmp_path):
        c = synthetic_cycle("motorway", seed=1, duration=120)
        save_cycle(c, tmp_path / "m.cycle")
        again = load_cycle(tmp_path / "m.cycle")
        np.testing.assert_allclose(again.v, c.v, rtol=1e-9)
        np.testing.assert_array_equal(again.t, c.t)

    @given(st.lists(st.floats(0.0, 120.0), min_size=2, max_size=40))
    def test_cycle_text_roundtrip(self, speeds):
        c = DriveCycle(np.arange(len(speeds), dtype=float), np.array(speeds) * KMH)
        again = loads_cycle(dumps_cycle(c))
        np.testing.assert_allclose(again.v, c.v, rtol=1e-9, atol=1e-12)

    def test_time_must_increase(self):
        with pytest.raises(ParseError):
            loads_cycle("t_s, v_kmh\n0, 10\n0, 12\n")
