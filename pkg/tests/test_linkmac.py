import math

import numpy as np
import pytest

from uavpos.config_io import scenario_from_dict
from uavpos.errors import DemandUnserviceable
from uavpos.geometry import Position3
from uavpos.linkmac import (
    MacParams,
    analytic_evaluate,
    demand_feasible,
    des_run,
    required_mcs,
    window_throughput,
)


def make_scenario(ues, buildings=(), mac=None, zone_z=(1.0, 60.0)):
    data = {
        "name": "test",
        "venue": {"width": 100.0, "depth": 100.0},
        "buildings": list(buildings),
        "ues": list(ues),
        "zone": {"x": [0.0, 100.0], "y": [0.0, 100.0], "z": list(zone_z)},
        "initial_position": [50.0, 50.0, 30.0],
    }
    if mac:
        data["mac"] = mac
    return scenario_from_dict(data)


def ue(i, x, y, demand):
    return {"id": i, "position": [x, y, 1.5], "demand_mbps": demand}


FOUR_CLOSE = make_scenario([ue(i, 45 + 3 * i, 50, 58.5) for i in range(4)])
# From here every link stays within the MCS9 SNR threshold (d < 14.4 m).
CLOSE_HOVER = Position3(50, 50, 10)


class TestRequiredMcs:
    def test_paper_anchors(self):
        assert required_mcs(58.5) == 0
        assert required_mcs(234.0) == 3
        assert required_mcs(175.5) == 2
        assert required_mcs(117.0) == 1

    def test_mid_ladder(self):
        assert required_mcs(600.0) == 8

    def test_unserviceable(self):
        with pytest.raises(DemandUnserviceable):
            required_mcs(800.0)


class TestMacParams:
    def test_derived_overhead_matches_efficiency(self):
        mac = MacParams(efficiency=0.7)
        rate = 351.0
        t_air = mac.packet_bits / (rate * 1e6)
        assert mac.service_time(rate) == pytest.approx(t_air / 0.7)

    def test_fixed_overhead(self):
        mac = MacParams(efficiency=0.7, overhead=50e-6)
        rate = 234.0
        t_air = mac.packet_bits / (rate * 1e6)
        assert mac.service_time(rate) == pytest.approx(t_air + 50e-6)

    def test_no_rate_is_infinite(self):
        assert MacParams().service_time(0.0) == math.inf


class TestAnalytic:
    def test_underload_carries_all_demand(self):
        # Close-in UEs reach MCS9; U = 4 * 58.5 / (0.7 * 780) ~= 0.43.
        report = analytic_evaluate(FOUR_CLOSE, CLOSE_HOVER)
        assert all(l.mcs == 9 for l in report.links)
        assert report.aggregate_throughput == pytest.approx(234.0)
        assert report.feasible
        assert demand_feasible(FOUR_CLOSE, CLOSE_HOVER)

    def test_overload_scales_proportionally(self):
        # Force MCS0 everywhere via a low-rate-only MCS table override.
        sc = make_scenario([ue(i, 45 + 3 * i, 50, 58.5) for i in range(4)])
        far = Position3(50.0, 50.0, 60.0)
        report = analytic_evaluate(sc, far)
        utilization = sum(
            l.offered / (sc.mac.efficiency * l.phy_rate) for l in report.links
        )
        if utilization > 1.0:
            for link in report.links:
                assert link.carried == pytest.approx(link.offered / utilization)

    def test_overload_aggregate_is_sum_over_u(self):
        sc = make_scenario([ue(i, 10 + 25 * i, 50, 234.0) for i in range(4)])
        report = analytic_evaluate(sc, Position3(50, 50, 55))
        utilization = sum(
            l.offered / (sc.mac.efficiency * l.phy_rate)
            for l in report.links
            if l.mcs is not None
        )
        assert utilization > 1.0
        assert not report.feasible
        assert report.aggregate_throughput == pytest.approx(
            sum(l.offered for l in report.links) / utilization
        )

    def test_airtime_reference_values(self):
        # All links at MCS9: U = 4*(58.5/(0.7*780)) = 0.4286 -> feasible.
        report = analytic_evaluate(FOUR_CLOSE, CLOSE_HOVER)
        u = sum(l.offered / (0.7 * l.phy_rate) for l in report.links)
        assert u == pytest.approx(0.42857142857, abs=1e-9)

    def test_snr_below_required_mcs_infeasible(self):
        # Demand 234 needs MCS3; place the UE so it only reaches MCS2.
        sc = make_scenario([ue(0, 5, 5, 234.0)])
        # Find a position where selected MCS is below 3.
        p = Position3(95.0, 95.0, 40.0)
        report = analytic_evaluate(sc, p)
        link = report.links[0]
        assert link.mcs is not None and link.mcs < 3
        assert not report.feasible

    def test_no_viable_mcs_carries_zero(self):
        sc = make_scenario(
            [ue(0, 5, 5, 58.5)],
            buildings=[{"x_min": 20, "x_max": 40, "y_min": 0, "y_max": 100,
                        "height": 50}],
        )
        report = analytic_evaluate(sc, Position3(90, 50, 10))
        link = report.links[0]
        assert not link.los
        assert link.mcs is None
        assert link.carried == 0.0
        assert report.aggregate_throughput == 0.0
        assert report.mean_delay == math.inf


class TestDes:
    def test_unloaded_single_ue(self):
        sc = make_scenario([ue(0, 50, 48, 58.5)])
        p = Position3(50, 50, 20)
        result = des_run(sc, p, duration=5.0, seed=3)
        quantum = sc.mac.packet_bits / 5.0 / 1e6
        assert result.aggregate == pytest.approx(58.5, abs=2 * quantum)
        # Unloaded queue: every delay equals the service time.
        rate = analytic_evaluate(sc, p).links[0].phy_rate
        assert np.allclose(result.delays, sc.mac.service_time(rate))

    def test_round_robin_fairness(self):
        # Two identical saturating UEs share the medium within 1%.
        sc = make_scenario([ue(0, 48, 50, 234.0), ue(1, 52, 50, 234.0)])
        far = Position3(50, 50, 58)
        result = des_run(sc, far, duration=5.0, seed=9)
        a, b = result.carried
        assert abs(a - b) / max(a, b) < 0.01

    def test_same_seed_identical(self):
        sc = FOUR_CLOSE
        p = Position3(50, 50, 25)
        r1 = des_run(sc, p, duration=3.0, seed=17)
        r2 = des_run(sc, p, duration=3.0, seed=17)
        assert r1.carried == r2.carried
        assert np.array_equal(r1.delays, r2.delays)

    def test_different_seed_differs(self):
        sc = FOUR_CLOSE
        p = Position3(50, 50, 25)
        r1 = des_run(sc, p, duration=3.0, seed=1)
        r2 = des_run(sc, p, duration=3.0, seed=2)
        assert not np.array_equal(r1.delays, r2.delays)

    def test_conservation(self):
        rng = np.random.default_rng(21)
        for _ in range(5):
            demands = rng.uniform(20, 200, size=3)
            sc = make_scenario(
                [ue(i, 30 + 20 * i, 50, float(d)) for i, d in enumerate(demands)]
            )
            p = Position3(50, 50, float(rng.uniform(10, 55)))
            result = des_run(sc, p, duration=4.0, seed=5)
            assert result.aggregate <= sum(demands) + 1e-9
            report = analytic_evaluate(sc, p)
            quantum = sc.mac.packet_bits / 4.0 / 1e6
            for carried, link in zip(result.carried, report.links):
                if link.mcs is None:
                    assert carried == 0.0
                else:
                    cap = sc.mac.efficiency * link.phy_rate
                    assert carried <= cap + quantum

    def test_delay_monotone_in_load(self):
        means = []
        for scale in (0.2, 0.5, 0.8, 1.2, 2.0):
            sc = make_scenario(
                [ue(i, 46 + 3 * i, 50, 58.5 * scale) for i in range(4)]
            )
            result = des_run(sc, Position3(50, 50, 20), duration=5.0, seed=4)
            means.append(float(np.mean(result.delays)))
        assert all(b >= a - 1e-12 for a, b in zip(means, means[1:]))

    def test_delays_non_negative(self):
        result = des_run(FOUR_CLOSE, Position3(50, 50, 20), duration=2.0, seed=8)
        assert np.all(result.delays >= 0)


class TestAnalyticDesAgreement:
    def test_feasible_scenarios_agree(self):
        rng = np.random.default_rng(915)
        found = 0
        while found < 8:
            n_ues = int(rng.integers(2, 6))
            ues = [
                ue(i, float(rng.uniform(5, 95)), float(rng.uniform(5, 95)),
                   float(rng.uniform(5, 60)))
                for i in range(n_ues)
            ]
            sc = make_scenario(ues)
            p = Position3(
                float(rng.uniform(10, 90)),
                float(rng.uniform(10, 90)),
                float(rng.uniform(10, 60)),
            )
            report = analytic_evaluate(sc, p)
            utilization = sum(
                l.offered / (sc.mac.efficiency * l.phy_rate)
                for l in report.links
                if l.mcs is not None
            )
            if not report.feasible or utilization > 0.9:
                continue
            found += 1
            result = des_run(sc, p, duration=5.0, seed=found)
            rel = abs(report.aggregate_throughput - result.aggregate) / result.aggregate
            assert rel <= 0.15

    def test_feasible_implies_full_carry(self):
        report = analytic_evaluate(FOUR_CLOSE, Position3(50, 50, 20))
        assert report.feasible
        for link in report.links:
            assert link.carried == link.offered


class TestWindowThroughput:
    def test_empty_window(self):
        assert window_throughput([], 10.0, 1.0) == 0.0

    def test_constant_rate(self):
        events = [(0.1 * k, 1_000_000) for k in range(1, 101)]
        # 10 Mbit/s delivered over the trailing 2 seconds.
        assert window_throughput(events, 10.0, 2.0) == pytest.approx(10.0)

    def test_only_trailing_window_counts(self):
        events = [(1.0, 8_000_000), (9.5, 8_000_000)]
        assert window_throughput(events, 10.0, 1.0) == pytest.approx(8.0)
