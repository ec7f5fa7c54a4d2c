import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecodrive import kernels
from ecodrive.kernels import ModeTable, evaluate, sweep
from ecodrive.solver import CostWeights, hamiltonian, hamiltonian_dv
from ecodrive.vehicle import DrivingMode, TruckConfig, mode_dvds, mode_feasible

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])
TABLE = ModeTable.build(TruckConfig())


@pytest.fixture(scope="module")
def table():
    return TABLE


class TestModeTable:
    def test_preference_order(self, table):
        # higher gear first, eco-roll (neutral) last
        assert table.modes[:3] == (DrivingMode.cruising(8), DrivingMode.coasting(8),
                                   DrivingMode.engine_brake(8))
        assert table.modes[-1] == DrivingMode.eco_roll()
        gears = [m.gear for m in table.modes[:-1]]
        assert gears == sorted(gears, reverse=True)

    def test_without_eco_roll(self):
        t = ModeTable.build(TruckConfig(eco_roll_enabled=False))
        assert DrivingMode.eco_roll() not in t.modes
        assert len(t.modes) == 24

    def test_index(self, table):
        assert table.modes[table.index(DrivingMode.coasting(3))] == DrivingMode.coasting(3)


class TestEvaluate:
    @pytest.mark.parametrize("backend", BACKENDS)
    @given(j=st.integers(0, len(TABLE.modes) - 1), v=st.floats(1.0, 35.0),
           lam=st.floats(-500.0, 500.0), phi=st.floats(1.0, 120.0))
    @settings(max_examples=150)
    def test_matches_model_functions(self, backend, j, v, lam, phi):
        cfg = TruckConfig()
        w = CostWeights.from_phi(phi)
        mode = TABLE.modes[j]
        ok, H, f, dH = evaluate(TABLE, j, v, lam, w.w_f, w.w_t, backend)
        assert bool(ok) == bool(mode_feasible(cfg, mode, v))
        if not ok:
            return
        assert f == pytest.approx(mode_dvds(cfg, mode, v), rel=1e-12, abs=1e-15)
        assert H == pytest.approx(hamiltonian(cfg, w, mode, v, lam), rel=1e-12, abs=1e-12)
        assert dH == pytest.approx(hamiltonian_dv(cfg, w, mode, v, lam), rel=1e-9, abs=1e-12)

    @pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
    @given(j=st.integers(0, len(TABLE.modes) - 1), v=st.floats(0.6, 39.0),
           lam=st.floats(-1e4, 1e4))
    def test_backends_identical(self, j, v, lam):
        a = evaluate(TABLE, j, v, lam, 1.0, 15.0, "python")
        b = evaluate(TABLE, j, v, lam, 1.0, 15.0, "cython")
        assert tuple(a) == tuple(b)


class TestSweep:
    @pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
    @pytest.mark.parametrize("lam_end", [-1e6, -80.0, -35.0, -5.0, 0.0, 3.0, 1e6])
    def test_backends_identical(self, table, lam_end):
        args = (table, 500, 60 / 3.6, lam_end, 2.0, 1.0, 15.0, 40.0, 0.5)
        a = sweep(*args, backend="python")
        b = sweep(*args, backend="cython")
        assert a[:2] == b[:2]
        for x, y in zip(a[2:], b[2:]):
            np.testing.assert_array_equal(x, y)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_velocity_recursion(self, table, backend):
        status, _, v, lam, idx = sweep(table, 300, 15.0, -30.0, 2.0, 1.0, 15.0, 40.0, 0.5, backend)
        assert status == kernels.OK
        cfg = TruckConfig()
        for k in range(300, 0, -1):
            mode = table.modes[idx[k - 1]]
            assert v[k - 1] == pytest.approx(v[k] - mode_dvds(cfg, mode, v[k]) * 2.0, rel=1e-13)

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_cap_reported(self, table, backend):
        # strong positive costate engine-brakes the whole way back: velocity grows past the cap
        status, at, v, _, _ = sweep(table, 2000, 20.0, 1e6, 5.0, 1.0, 15.0, 25.0, 0.5, backend)
        assert status == kernels.ABOVE_CAP
        assert v[at] > 25.0

    @pytest.mark.parametrize("backend", BACKENDS)
    def test_argmin_at_final_boundary(self, table, backend):
        cfg = TruckConfig()
        w = CostWeights.from_phi(15)
        vN, lam = 16.0, -20.0
        _, _, _, _, idx = sweep(table, 4, vN, lam, 1.0, w.w_f, w.w_t, 40.0, 0.5, backend)
        feasible = [m for m in table.modes if mode_feasible(cfg, m, vN)]
        best = min(feasible, key=lambda m: hamiltonian(cfg, w, m, vN, lam))
        assert table.modes[idx[3]] == best
