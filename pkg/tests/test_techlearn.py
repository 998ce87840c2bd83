import math

import numpy as np
import pytest

from decarbsim.techlearn import (AdoptionCurve, DegenerateHorizon,
                                 NonpositiveCumulative, TargetOutOfRange,
                                 TechCurve, TechState, advance_tech,
                                 calibrate_exponent, logistic_level,
                                 quarterly_deployment, wright_cost)


def curve(c0=70.0, floor=35.0, x0=1e6, b=1.0):
    return TechCurve(name="t", c0=c0, floor=floor, x0=x0, b=b)


class TestWrightCost:
    def test_reference_identity(self):
        assert wright_cost(curve(), 1e6) == pytest.approx(70.0, abs=1e-12)

    def test_zero_exponent_is_flat(self):
        c = curve(b=0.0)
        for x in (1.0, 1e6, 1e12):
            assert wright_cost(c, x) == pytest.approx(70.0, abs=1e-12)

    def test_wind_anchor(self):
        # endpoints 35 and 43 are the published wind-cost anchors
        c = curve(b=1.06466)
        assert wright_cost(c, 4e6) == pytest.approx(43.00, abs=0.01)

    def test_nonpositive_cumulative(self):
        with pytest.raises(NonpositiveCumulative):
            wright_cost(curve(), 0.0)

    def test_floor_and_monotonicity(self):
        c = curve(b=0.8)
        xs = np.logspace(0, 14, 200)
        costs = [wright_cost(c, x) for x in xs]
        assert all(v >= c.floor for v in costs)
        assert all(a >= b for a, b in zip(costs, costs[1:]))


class TestCalibrateExponent:
    def test_closed_form_wind(self):
        b = calibrate_exponent(70.0, 35.0, 1e6, 4e6, 43.0)
        assert b == pytest.approx(1.06466, abs=1e-4)

    def test_small_epsilon_first_order(self):
        # for cost_target = c0 - eps at X ratio e: b ~= eps / (c0 - floor)
        eps = 1e-4
        b = calibrate_exponent(70.0, 35.0, 1.0, math.e, 70.0 - eps)
        assert b == pytest.approx(eps / 35.0, rel=1e-3)

    def test_target_out_of_range(self):
        with pytest.raises(TargetOutOfRange):
            calibrate_exponent(70.0, 35.0, 1e6, 4e6, 34.0)
        with pytest.raises(TargetOutOfRange):
            calibrate_exponent(70.0, 35.0, 1e6, 4e6, 71.0)

    def test_degenerate_horizon(self):
        with pytest.raises(DegenerateHorizon):
            calibrate_exponent(70.0, 35.0, 1e6, 1e6, 43.0)

    def test_round_trip_property_sweep(self):
        gen = np.random.default_rng(5)
        for _ in range(300):
            floor = float(gen.uniform(0, 50))
            c0 = floor + float(gen.uniform(1, 100))
            target = floor + (c0 - floor) * float(gen.uniform(0.05, 0.95))
            ratio = float(gen.uniform(1.5, 1e4))
            b = calibrate_exponent(c0, floor, 1.0, ratio, target)
            got = wright_cost(TechCurve("s", c0, floor, 1.0, b), ratio)
            assert abs(got - target) / target <= 1e-9


class TestLogistic:
    def test_midpoint(self):
        c = AdoptionCurve(k=1000.0, r=0.2, t0=40.0)
        assert logistic_level(c, 40.0) == pytest.approx(500.0, abs=1e-12)

    def test_asymptotes(self):
        c = AdoptionCurve(k=1000.0, r=0.2, t0=0.0)
        assert logistic_level(c, -50 / 0.2) <= 1e-9 * 1000.0 + 1e-9
        assert abs(logistic_level(c, 50 / 0.2) - 1000.0) <= 1e-9 * 1000.0

    def test_direct_evaluation(self):
        c = AdoptionCurve(k=1000.0, r=0.2, t0=25.0)
        assert logistic_level(c, 35.0) == pytest.approx(880.797, abs=1e-3)

    def test_strictly_increasing_and_bounded(self):
        c = AdoptionCurve(k=77.0, r=0.3, t0=10.0)
        wide = np.linspace(-500, 500, 1000)
        vals = [logistic_level(c, t) for t in wide]
        assert all(a <= b for a, b in zip(vals, vals[1:]))
        assert all(0.0 < v < 77.0 for v in vals)
        # strict increase wherever float64 can resolve the tails
        core = np.linspace(10 - 34 / 0.3, 10 + 34 / 0.3, 500)
        vals = [logistic_level(c, t) for t in core]
        assert all(a < b for a, b in zip(vals, vals[1:]))


class TestAdvanceTech:
    def test_zero_deployment_unchanged(self):
        st = TechState(curve=curve(), adoption=None, cumulative=2e6)
        out = advance_tech(st, 0.0)
        assert out.cumulative == st.cumulative
        assert out.current_cost == st.current_cost

    def test_path_independence(self):
        st = TechState(curve=curve(b=0.7), adoption=None, cumulative=1e6)
        a = advance_tech(advance_tech(st, 5.0), 5.0)
        b = advance_tech(st, 10.0)
        assert a.cumulative == b.cumulative
        assert a.current_cost == b.current_cost

    def test_cost_never_stale(self):
        st = TechState(curve=curve(b=0.5), adoption=None, cumulative=1e6)
        for dep in (0.0, 1e5, 3e6, 7e6):
            st = advance_tech(st, dep)
            assert st.current_cost == wright_cost(st.curve, st.cumulative)

    def test_deployment_is_max_of_schedule_and_purchases(self):
        ad = AdoptionCurve(k=1e6, r=0.2, t0=10.0)
        st = TechState(curve=curve(), adoption=ad, cumulative=1e6)
        sched = logistic_level(ad, 5) - logistic_level(ad, 4)
        assert quarterly_deployment(st, 5, 0.0) == pytest.approx(sched)
        assert quarterly_deployment(st, 5, sched * 10) == pytest.approx(sched * 10)
