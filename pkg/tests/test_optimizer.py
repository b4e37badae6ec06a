import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from berthplan.core import ConfigurationError
from berthplan.optimizer import (BoxBounds, OptimizationError, OptimizerConfig, minimize, plan, repair_to_box)
from berthplan.scenario import builtin


def sphere(center):
    c = np.asarray(center, dtype=float)
    return lambda x: float(np.sum((np.asarray(x) - c) ** 2))


BOX26 = BoxBounds(np.full(26, -5.0), np.full(26, 5.0))


class TestBounds:
    def test_nanko_layout(self):
        b = BoxBounds.for_schedule(25)
        assert len(b) == 101
        assert b.lower[0] == 630 and b.upper[0] == 2250
        assert b.upper[1] == pytest.approx(math.radians(35))
        assert b.upper[26] == 2.08 and b.lower[26] == -2.08
        assert b.upper[51] == 4.24 and b.upper[100] == 4.24

    def test_inverted(self):
        with pytest.raises(ConfigurationError):
            BoxBounds(np.array([1.0]), np.array([0.0]))

    def test_unit_round_trip(self):
        b = BoxBounds.for_schedule(3)
        x = np.linspace(0, 1, len(b))
        assert b.to_unit(b.from_unit(x)) == pytest.approx(x)


class TestRepair:
    def test_inside_unchanged(self):
        b = BoxBounds.for_schedule(2)
        x = 0.5 * (b.lower + b.upper)
        xf, pen = repair_to_box(x, b)
        assert np.array_equal(xf, x) and pen == 0.0

    def test_terminal_time_clamp(self):
        b = BoxBounds.for_schedule(2)
        x = 0.5 * (b.lower + b.upper)
        x[0] = 3000.0
        xf, pen = repair_to_box(x, b)
        assert xf[0] == 2250.0
        assert pen == pytest.approx(((3000 - 2250) / (2250 - 630)) ** 2)

    def test_at_bounds(self):
        b = BoxBounds.for_schedule(2)
        for x in (b.lower, b.upper):
            xf, pen = repair_to_box(x, b)
            assert np.array_equal(xf, x) and pen == 0.0

    @given(st.lists(st.floats(-1e4, 1e4), min_size=9, max_size=9))
    def test_always_feasible(self, vals):
        b = BoxBounds.for_schedule(2)
        xf, pen = repair_to_box(np.array(vals), b)
        assert b.contains(xf) and pen >= 0.0


class TestConfig:
    def test_small_population(self):
        with pytest.raises(ConfigurationError):
            OptimizerConfig(initial_population=3)

    def test_cap_below_initial(self):
        with pytest.raises(ConfigurationError):
            OptimizerConfig(initial_population=40, max_population=20)


class TestMinimize:
    @pytest.mark.parametrize("seed", range(5))
    def test_sphere_26(self, seed):
        res = minimize(sphere(np.zeros(26)), BOX26, OptimizerConfig(seed=seed, max_evaluations=100_000, ftarget=1e-11))
        assert res.best_f < 1e-10
        assert res.evaluations <= 100_000

    def test_exterior_optimum(self):
        b = BoxBounds(np.zeros(10), np.ones(10))
        target = np.full(10, 1.5)
        target[:5] = 0.5
        res = minimize(sphere(target), b, OptimizerConfig(seed=2, max_evaluations=30_000))
        proj = np.clip(target, 0, 1)
        assert np.max(np.abs(b.to_unit(res.best_x) - b.to_unit(proj))) < 1e-6

    def test_restart_schedule(self):
        res = minimize(lambda x: 1.0, BOX26, OptimizerConfig(seed=0, max_evaluations=20_000))
        assert res.populations[:6] == [20, 40, 80, 160, 240, 240]
        assert all(ev.trigger == "flat_fitness_history" for ev in res.restarts)
        assert max(h["popsize"] for h in res.history) <= 240

    def test_budget_exact(self):
        res = minimize(sphere(np.ones(26)), BOX26, OptimizerConfig(seed=1, max_evaluations=1234))
        assert res.evaluations == 1234

    def test_deterministic(self):
        cfg = OptimizerConfig(seed=7, max_evaluations=3000)
        a = minimize(sphere(np.ones(26)), BOX26, cfg)
        b = minimize(sphere(np.ones(26)), BOX26, cfg)
        assert np.array_equal(a.best_x, b.best_x) and a.history == b.history

    def test_threads_do_not_change_results(self):
        a = minimize(sphere(np.ones(26)), BOX26, OptimizerConfig(seed=3, max_evaluations=2000))
        b = minimize(sphere(np.ones(26)), BOX26, OptimizerConfig(seed=3, max_evaluations=2000, threads=4))
        assert np.array_equal(a.best_x, b.best_x) and a.history == b.history

    def test_candidates_inside_box(self):
        b = BoxBounds(np.zeros(5), np.ones(5))
        seen = []

        def f(x):
            seen.append(np.array(x))
            return float(np.sum((x - 3.0) ** 2))

        minimize(f, b, OptimizerConfig(seed=0, max_evaluations=2000))
        assert all(b.contains(x) for x in seen)

    def test_best_is_history_minimum(self):
        res = minimize(lambda x: float(np.sum(np.abs(x))), BOX26, OptimizerConfig(seed=4, max_evaluations=5000))
        assert res.best_f == min(h["gen_best"] for h in res.history)
        best = [h["best"] for h in res.history]
        assert all(b2 <= b1 for b1, b2 in zip(best, best[1:]))

    def test_non_finite_objective(self):
        with pytest.raises(OptimizationError, match="finite"):
            minimize(lambda x: math.nan, BOX26, OptimizerConfig(max_evaluations=100))

    def test_progress_events(self):
        events = []
        minimize(lambda x: 1.0, BOX26, OptimizerConfig(max_evaluations=3000), progress=events.append)
        kinds = {e["event"] for e in events}
        assert kinds == {"generation", "restart"}

    @settings(max_examples=10, deadline=None)
    @given(st.integers(0, 2**20))
    def test_seed_determinism_property(self, seed):
        b = BoxBounds(np.zeros(4), np.ones(4))
        cfg = OptimizerConfig(seed=seed, max_evaluations=200)
        r1 = minimize(lambda x: float(np.sum(x)), b, cfg)
        r2 = minimize(lambda x: float(np.sum(x)), b, cfg)
        assert r1.best_f == r2.best_f


def test_plan_attaches_breakdown():
    s = builtin("straight_berth")
    res = plan(s, OptimizerConfig(seed=0, max_evaluations=200))
    assert res.best_breakdown is not None
    assert res.best_breakdown.J == pytest.approx(res.best_f)
