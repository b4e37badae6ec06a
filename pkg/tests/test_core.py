import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from berthplan.core import (KNOT, ConfigurationError, ControlSchedule, HydroCoefficients, MissingCoefficientGroup,
                            ShipParameters, ShipState, ToleranceVector, WeightConfig, WindCondition,
                            berthing_speed_tolerance, dimensional_weights, knots_to_mps, mps_to_knots,
                            wrap_angle)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


class TestWrapAngle:
    def test_340_deg(self):
        assert wrap_angle(math.radians(340)) == pytest.approx(math.radians(-20))

    def test_pi_kept(self):
        assert wrap_angle(math.pi) == math.pi

    def test_minus_pi_maps_to_pi(self):
        assert wrap_angle(-math.pi) == pytest.approx(math.pi)

    def test_minus_three_pi(self):
        assert wrap_angle(-3 * math.pi) == pytest.approx(math.pi)

    @pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
    def test_non_finite_rejected(self, bad):
        with pytest.raises(ValueError):
            wrap_angle(bad)

    @given(finite)
    def test_range_and_congruence(self, x):
        w = wrap_angle(x)
        assert -math.pi < w <= math.pi
        k = (x - w) / (2 * math.pi)
        assert abs(k - round(k)) < 1e-6

    @given(finite)
    def test_idempotent(self, x):
        w = wrap_angle(x)
        assert wrap_angle(w) == w


class TestUnits:
    def test_eight_knots(self):
        assert knots_to_mps(8) == pytest.approx(4.11556, abs=1e-5)

    def test_zero(self):
        assert knots_to_mps(0) == 0.0

    def test_five_knots_is_thruster_cutoff(self):
        assert knots_to_mps(5) == pytest.approx(2.5722, abs=5e-5)
        assert ShipParameters().u_threshold == pytest.approx(knots_to_mps(5), abs=5e-5)

    @given(st.floats(min_value=-100, max_value=100))
    def test_round_trip(self, v):
        assert mps_to_knots(knots_to_mps(v)) == pytest.approx(v, abs=1e-12)


class TestBerthingSpeed:
    def test_gt_10000(self):
        # 0.279 * 10000**-0.114 evaluated by hand: exp(-0.114 * ln 1e4) = 0.349938...
        assert berthing_speed_tolerance(10000) == pytest.approx(0.279 * math.exp(-0.114 * math.log(1e4)))
        assert berthing_speed_tolerance(10000) == pytest.approx(0.09763, abs=1e-5)

    def test_gt_one(self):
        assert berthing_speed_tolerance(1) == pytest.approx(0.279)

    def test_monotone(self):
        assert berthing_speed_tolerance(100000) == pytest.approx(0.07509, abs=1e-5)
        assert berthing_speed_tolerance(100000) < berthing_speed_tolerance(10000)

    @pytest.mark.parametrize("gt", [0, -5])
    def test_non_positive_rejected(self, gt):
        with pytest.raises(ValueError):
            berthing_speed_tolerance(gt)


class TestShipState:
    def test_heading_normalized(self):
        s = ShipState(psi=math.radians(340))
        assert s.psi == pytest.approx(math.radians(-20))

    def test_non_finite_rejected(self):
        with pytest.raises(ConfigurationError):
            ShipState(u=math.nan)

    def test_array_round_trip(self):
        s = ShipState(1, 2, 3, 4, 0.5, 0.01)
        assert ShipState.from_array(s.as_array()) == s

    def test_wrong_shape(self):
        with pytest.raises(ValueError):
            ShipState.from_array([1, 2, 3])


class TestControlSchedule:
    def test_coverage_required(self):
        with pytest.raises(ConfigurationError):
            ControlSchedule(np.zeros((2, 4)), 90.0, 181.0)

    def test_segment_index_capped(self):
        sch = ControlSchedule(np.arange(12.0).reshape(3, 4), 90.0, 270.0)
        assert sch.segment_index(0.0) == 0
        assert sch.segment_index(89.999) == 0
        assert sch.segment_index(90.0) == 1
        assert sch.segment_index(270.0) == 2
        assert sch.at(200).delta == 8.0

    def test_segments_read_only(self):
        sch = ControlSchedule(np.zeros((1, 4)), 90.0, 90.0)
        with pytest.raises(ValueError):
            sch.segments[0, 0] = 1.0

    def test_bad_shape(self):
        with pytest.raises(ConfigurationError):
            ControlSchedule(np.zeros((2, 3)), 90.0, 90.0)


class TestWind:
    def test_direction_normalized(self):
        assert WindCondition(gamma_T=-math.pi / 2, U_T=1).gamma_T == pytest.approx(1.5 * math.pi)
        assert WindCondition(gamma_T=2 * math.pi).gamma_T == 0.0

    def test_negative_speed(self):
        with pytest.raises(ConfigurationError):
            WindCondition(0.0, -1.0)


class TestTolerance:
    def test_defaults(self):
        t = ToleranceVector.berthing()
        assert t.as_array() == pytest.approx([1, 0.1, 1, 0.1, math.radians(1), math.radians(0.0764)])

    def test_unberthing_allows_zero_sway(self):
        t = ToleranceVector.unberthing()
        assert t.vm == 0.0
        assert t.r == pytest.approx(math.radians(0.764))

    @pytest.mark.parametrize("field", ["x0", "u", "y0", "psi", "r"])
    def test_zero_rejected_except_sway(self, field):
        with pytest.raises(ConfigurationError):
            ToleranceVector(**{field: 0.0})


class TestWeights:
    def test_w_dim_formula(self):
        w = WeightConfig(w_L=15.0, w_U=4 * KNOT, L_tol=75.0)
        wu = 4 * KNOT
        expect = [1 / 225, 1 / wu**2, 1 / 225, 1 / wu**2, math.pi**2, 225 / wu**2]
        assert w.w_dim == pytest.approx(expect, rel=1e-15)

    @given(st.floats(0.1, 1e3), st.floats(0.01, 10))
    def test_w_dim_recomputed_matches(self, wl, wu):
        w = WeightConfig(w_L=wl, w_U=wu, L_tol=1.0)
        assert np.array_equal(w.w_dim, dimensional_weights(wl, wu))
        assert np.all(w.w_dim > 0)

    def test_defaults(self):
        w = WeightConfig.for_ship(150.0, 8 * KNOT)
        assert (w.w_L, w.w_U, w.L_tol, w.w_pen, w.w_c) == pytest.approx((15.0, 4 * KNOT, 75.0, 1e4, 1e10))

    def test_pen_must_exceed_one(self):
        with pytest.raises(ConfigurationError):
            WeightConfig(1, 1, 1, w_pen=1.0)

    def test_collision_weight_dominates(self):
        with pytest.raises(ConfigurationError):
            WeightConfig(1, 1, 1, w_pen=1e4, w_c=1e3)


class TestShipParameters:
    def test_defaults_valid(self):
        p = ShipParameters()
        assert p.Lpp == 150.0 and p.B == 24.46

    def test_xg_bound(self):
        with pytest.raises(ConfigurationError):
            ShipParameters(x_G=80.0)

    def test_positive_lengths(self):
        with pytest.raises(ConfigurationError):
            ShipParameters(Dp=0.0)


class TestHydroCoefficients:
    def test_missing_group_error_names_group(self):
        c = HydroCoefficients({})
        with pytest.raises(MissingCoefficientGroup) as ei:
            c.group("hull")
        assert ei.value.group == "hull"
        assert "hull" in str(ei.value)

    def test_missing_key(self):
        with pytest.raises(ConfigurationError):
            HydroCoefficients({"rudder_third": {"kappa3": 1.0}})

    def test_negative_added_mass(self):
        with pytest.raises(ConfigurationError):
            HydroCoefficients({"added_mass": {"mx_nd": -0.1, "my_nd": 0, "Jzz_nd": 0, "Izz_nd": 0}})

    def test_unknown_group(self):
        with pytest.raises(ConfigurationError):
            HydroCoefficients({"waves": {}})
