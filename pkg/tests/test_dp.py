import itertools

import numpy as np
import pytest

from ecodrive.dp import dp_solve
from ecodrive.errors import NoFeasiblePath, ValidationError
from ecodrive.solver import CostWeights, SegmentProblem, solve_costate
from ecodrive.vehicle import DrivingMode, mode_dvds, mode_feasible, mode_fuel_rate, running_cost

KMH = 1.0 / 3.6
W15 = CostWeights.from_phi(15)


def enumerate_paths(cfg, prob, tol):
    """Exhaustive search over every mode sequence on the exact dynamics."""
    best = np.inf
    modes = cfg.modes()
    ds = prob.delta_s
    for seq in itertools.product(modes, repeat=prob.n):
        v, cost = prob.vf, 0.0
        for m in reversed(seq):
            if not mode_feasible(cfg, m, v):
                break
            cost += running_cost(cfg, m, v, prob.weights.w_f, prob.weights.w_t) * ds
            v = v - mode_dvds(cfg, m, v) * ds
        else:
            if abs(v - prob.v0) <= tol:
                best = min(best, cost)
    return best


class TestDPOracle:
    def test_equal_speeds_cruise(self, cfg):
        v0 = 60 * KMH
        prob = SegmentProblem(0.0, 200.0, v0, v0, 50, W15)
        res = dp_solve(cfg, prob, tol=0.0)
        assert all(m.kind == 0 for m in res.modes)
        rate = min(mode_fuel_rate(cfg, DrivingMode.cruising(y), v0)
                   for y in range(1, 9) if mode_feasible(cfg, DrivingMode.cruising(y), v0))
        assert res.cost == pytest.approx(prob.n * prob.delta_s * (W15.w_f * rate + W15.w_t) / v0, rel=1e-12)

    def test_bounds_shooting_solver(self, cfg):
        prob = SegmentProblem(0.0, 1000.0, 80 * KMH, 60 * KMH, 100, W15)
        dp = dp_solve(cfg, prob, v_resolution=0.05)
        pmp = solve_costate(cfg, prob, raise_on_failure=False)
        assert dp.cost <= pmp.cost_J
        assert pmp.cost_J <= 1.02 * dp.cost

    def test_finer_grid(self, cfg):
        prob = SegmentProblem(0.0, 1000.0, 80 * KMH, 60 * KMH, 100, W15)
        coarse = dp_solve(cfg, prob, v_resolution=0.05).cost
        fine = dp_solve(cfg, prob, v_resolution=0.025).cost
        assert fine <= coarse * 1.005

    def test_matches_enumeration(self, cfg):
        prob = SegmentProblem(0.0, 60.0, 50 * KMH + 0.3, 50 * KMH, 3, W15)
        exact = enumerate_paths(cfg, prob, 0.1)
        dp = dp_solve(cfg, prob, v_resolution=0.002, tol=0.1).cost
        assert np.isfinite(exact)
        assert dp == pytest.approx(exact, rel=2e-3)

    def test_replay_ends_at_target(self, cfg):
        prob = SegmentProblem(0.0, 500.0, 60 * KMH, 45 * KMH, 100, W15)
        res = dp_solve(cfg, prob)
        assert res.v[-1] == prob.vf
        assert abs(res.v[0] - prob.v0) <= 0.1 + 0.05
        assert res.path_cost == pytest.approx(res.cost, rel=0.01)

    def test_deterministic(self, cfg):
        prob = SegmentProblem(0.0, 400.0, 55 * KMH, 40 * KMH, 80, W15)
        a = dp_solve(cfg, prob)
        b = dp_solve(cfg, prob)
        np.testing.assert_array_equal(a.grid.value, b.grid.value)
        np.testing.assert_array_equal(a.grid.policy, b.grid.policy)

    def test_sample_cap(self, cfg):
        prob = SegmentProblem(0.0, 1000.0, 80 * KMH, 60 * KMH, 400, W15)
        with pytest.raises(ValidationError):
            dp_solve(cfg, prob)

    def test_bad_resolution(self, cfg):
        prob = SegmentProblem(0.0, 100.0, 60 * KMH, 50 * KMH, 20, W15)
        with pytest.raises(ValidationError):
            dp_solve(cfg, prob, v_resolution=0.0)

    def test_unreachable(self, cfg):
        prob = SegmentProblem(0.0, 100.0, 80 * KMH, 20 * KMH, 50, W15)
        with pytest.raises(NoFeasiblePath):
            dp_solve(cfg, prob)
