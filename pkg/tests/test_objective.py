import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from berthplan.core import KNOT, ConfigurationError, ControlSchedule, ShipState, ToleranceVector, WeightConfig
from berthplan.dynamics import Trajectory
from berthplan.geometry import Polygon
from berthplan.objective import (BERTHING, SENTINEL, UNBERTHING, Waypoint, collision_penalty, decode, encode,
                                 evaluate, evaluate_with_trajectory, terminal_deviation, terminal_penalty,
                                 terminal_satisfied, waypoint_penalty)
from berthplan.scenario import builtin, load_coefficients

NANKO_W = WeightConfig(w_L=15.0, w_U=4 * KNOT, L_tol=75.0)
BERTH_TOL = ToleranceVector.berthing()


def nanko_j1_by_hand():
    wu2 = (4 * 0.514444) ** 2
    deg = math.pi / 180.0
    return (1.0 / 225 + 0.01 / wu2 + 1.0 / 225 + 0.01 / wu2 + math.pi**2 * deg**2
            + 225.0 / wu2 * (0.0764 * deg) ** 2)


def at_rest_on_target(name="nanko_berth"):
    s = builtin(name)
    return s.with_changes(x_int=s.x_des, wind_enabled=False)


def zero_X(s, t_f):
    X = np.zeros(s.n_decision)
    X[0] = t_f
    return X


class TestDecode:
    def test_slicing(self):
        X = np.array([100.0, 1, 2, 3, 4, 5, 6, 7, 8])
        t_f, sch = decode(X, 2, 90.0)
        assert t_f == 100.0
        assert sch.segments.tolist() == [[1, 3, 5, 7], [2, 4, 6, 8]]

    def test_full_horizon(self):
        X = np.zeros(101)
        X[0] = 2250.0
        t_f, sch = decode(X, 25, 90.0)
        assert sch.m * sch.segment_duration >= t_f

    def test_wrong_length(self):
        with pytest.raises(ConfigurationError, match="4m\\+1"):
            decode(np.zeros(10), 2, 90.0)

    @given(st.integers(1, 12), st.integers(0, 2**31))
    def test_round_trip(self, m, seed):
        rng = np.random.default_rng(seed)
        X = rng.uniform(-2, 2, 4 * m + 1)
        X[0] = rng.uniform(1, m * 90.0)
        t_f, sch = decode(X, m, 90.0)
        assert np.array_equal(encode(t_f, sch), X)


class TestTerminal:
    def test_zero(self):
        s = ShipState(1, 2, 3, 4, 0.5, 0.01)
        assert np.all(terminal_deviation(s, s) == 0.0)

    def test_heading_wrap(self):
        d = terminal_deviation(ShipState(psi=math.radians(10)), ShipState(psi=math.radians(350)))
        assert d[4] == pytest.approx(math.radians(-20))

    def test_unberthing_surplus(self):
        d = terminal_deviation(ShipState(u=3.286), ShipState(u=3.086))
        assert d[1] == pytest.approx(-0.2)

    def test_nanko_j1_at_tolerance(self):
        dev = BERTH_TOL.as_array()
        j1 = terminal_penalty(dev, BERTHING, BERTH_TOL, NANKO_W)
        assert j1 == pytest.approx(nanko_j1_by_hand(), rel=1e-12)
        assert j1 == pytest.approx(1.67130e-2, abs=5e-8)
        assert j1 * 1081.6 == pytest.approx(18.077, abs=0.002)

    def test_position_miss_penalty(self):
        dev = np.zeros(6)
        dev[0] = 2.0
        base = terminal_penalty(np.zeros(6), BERTHING, BERTH_TOL, NANKO_W)
        miss = terminal_penalty(dev, BERTHING, BERTH_TOL, NANKO_W)
        assert miss - base == pytest.approx(1e4 * 4 / 225 - 1 / 225, rel=1e-12)
        assert 1e4 * 4 / 225 == pytest.approx(177.8, abs=0.05)

    def test_unberthing_one_sided(self):
        tol = ToleranceVector.unberthing()
        fast = np.array([0, -1.5, 0, 0, 0, 0.0])
        slow = np.array([0, 0.3, 0, 0, 0, 0.0])
        assert terminal_satisfied(fast, UNBERTHING, tol)[1]
        assert not terminal_satisfied(fast, BERTHING, tol)[1]
        assert not terminal_satisfied(slow, UNBERTHING, tol)[1]

    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError):
            terminal_satisfied(np.zeros(6), "docking", BERTH_TOL)

    @given(st.floats(2.0, 6.0), st.floats(0.0, 2.0))
    def test_unberthing_surge_monotone(self, u_end, du):
        tol = ToleranceVector.unberthing()
        des = ShipState(u=3.086)
        w = WeightConfig(w_L=15.0, w_U=3 * KNOT, L_tol=75.0)
        j_a = terminal_penalty(terminal_deviation(ShipState(u=u_end), des), UNBERTHING, tol, w)
        j_b = terminal_penalty(terminal_deviation(ShipState(u=u_end + du), des), UNBERTHING, tol, w)
        assert j_b <= j_a


def _traj(times, xy, pen=None):
    times = np.asarray(times, dtype=float)
    st_ = np.zeros((len(times), 6))
    st_[:, 0], st_[:, 2] = np.asarray(xy)[:, 0], np.asarray(xy)[:, 1]
    return Trajectory(times, st_, np.zeros((len(times), 4)), np.zeros(len(times)) if pen is None else pen)


class TestPathTerms:
    def test_collision_rectangle(self):
        t = np.arange(11.0)
        tr = _traj(t, np.zeros((11, 2)), np.full(11, 2.0))
        assert collision_penalty(tr) == pytest.approx(20.0)

    def test_collision_zero(self):
        assert collision_penalty(_traj(np.arange(5.0), np.zeros((5, 2)))) == 0.0

    def test_waypoint_hit_and_miss(self):
        tr = _traj([0, 1], [[0, 0], [10, 0]])
        assert waypoint_penalty(tr, [], NANKO_W) == 0.0
        assert waypoint_penalty(tr, [Waypoint(0, 0)], NANKO_W) == pytest.approx(25.0)
        assert waypoint_penalty(tr, [Waypoint(0, 300)], NANKO_W) == pytest.approx(400.0)

    def test_waypoint_radius_positive(self):
        with pytest.raises(ConfigurationError):
            Waypoint(0, 0, 0.0)

    @given(st.permutations(range(4)))
    def test_waypoint_order_invariant(self, perm):
        tr = _traj(np.arange(4.0), [[0, 0], [50, 10], [100, 40], [200, 0]])
        wps = [Waypoint(0, 0), Waypoint(100, 300), Waypoint(210, 5), Waypoint(-90, 20)]
        assert waypoint_penalty(tr, [wps[i] for i in perm], NANKO_W) == pytest.approx(
            waypoint_penalty(tr, wps, NANKO_W), rel=1e-14)


class TestEvaluate:
    def test_rest_on_target(self):
        s = at_rest_on_target()
        bd = evaluate(zero_X(s, 1000.0), s)
        assert bd.C == 0.0 and bd.feasible
        assert bd.J == pytest.approx(16.713, abs=1e-3)
        bd = evaluate(zero_X(s, 1081.6), s)
        assert bd.J == pytest.approx(18.077, abs=0.002)
        assert bd.J == bd.terminal_term + bd.collision_term + bd.waypoint_term

    @given(st.floats(630, 2250))
    @settings(max_examples=15, deadline=None)
    def test_proportional_to_terminal_time(self, t_f):
        s = at_rest_on_target()
        bd = evaluate(zero_X(s, t_f), s)
        slope = float(np.dot(s.weights.w_dim, s.tol.as_array() ** 2))
        assert bd.J == pytest.approx(slope * t_f, rel=1e-12)

    def test_collision_dominates(self):
        s = at_rest_on_target()
        rng = np.random.default_rng(5)
        lo, hi = s.bounds.lower, s.bounds.upper
        free, hit = [], []
        for _ in range(60):
            bd = evaluate(rng.uniform(lo, hi), s)
            (hit if bd.C > 0 else free).append(bd.J)
        rest = evaluate(zero_X(s, 2250.0), s)
        free.append(rest.J)
        assert hit, "sampling never produced a collision"
        assert min(hit) > max(free)

    def test_deterministic(self):
        s = builtin("nanko_berth")
        X = np.random.default_rng(1).uniform(s.bounds.lower, s.bounds.upper)
        a, b = evaluate(X, s), evaluate(X, s)
        assert a.J == b.J and a.to_dict() == b.to_dict()

    def test_obstacle_order_invariant(self):
        s = builtin("nanko_berth")
        X = np.random.default_rng(2).uniform(s.bounds.lower, s.bounds.upper)
        r = s.with_changes(obstacles=type(s.obstacles)(tuple(reversed(s.obstacles.obstacles))))
        assert evaluate(X, r).J == pytest.approx(evaluate(X, s).J, rel=1e-12)

    def test_divergence_gets_sentinel(self):
        s = at_rest_on_target("straight_berth")
        groups = s.coeffs.to_dict()
        groups["hull"]["R0_fwd"] = -50.0
        from berthplan.core import HydroCoefficients
        bad = s.with_changes(x_int=ShipState(u=2.0), coeffs=HydroCoefficients(groups))
        bd = evaluate(zero_X(bad, 900.0), bad)
        assert bd.J == SENTINEL and bd.diverged and not bd.feasible
        assert bd.failure_time is not None

    def test_trajectory_returned(self):
        s = at_rest_on_target("straight_berth")
        bd, tr = evaluate_with_trajectory(zero_X(s, 300.0), s)
        assert tr.times[-1] == 300.0 and tr.states.shape == (301, 6)

    def test_waypoint_scenario_adds_term(self):
        s = builtin("nanko_waypoint")
        X = np.random.default_rng(3).uniform(s.bounds.lower, s.bounds.upper)
        bd = evaluate(X, s)
        assert bd.waypoint_term == pytest.approx(bd.J_WP * bd.t_f)
        assert bd.J_WP >= len(s.waypoints) * s.weights.w_dim[0] * min(w.L_tol for w in s.waypoints) ** 2 - 1e-9


def test_coefficients_symmetric_default():
    c = load_coefficients("tanker_default").group("propeller_reverse")
    assert c["y0"] == 0.0 and c["n0"] == 0.0


def test_polygon_import_sanity():
    assert Polygon(((0, 0), (1, 0), (0, 1))).area == pytest.approx(0.5)


def test_schedule_defaults():
    assert ControlSchedule(np.zeros((1, 4)), 90.0, 90.0).m == 1
