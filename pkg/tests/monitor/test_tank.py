"""Tests for the tank mass balance and the CUSUM leak detector."""

import math

import numpy as np
import pytest

from scripts.monitor.alerts import AlertKind, Severity
from scripts.monitor.tank import (
    CusumState,
    LeakDetector,
    cusum_run,
    cusum_update,
    leak_detector,
    leak_step,
    mass_balance_residual,
)
from scripts.sim.sensors import TankReading


def _reading(hour: int, level: float, sold: float = 0.0, delivered: float = 0.0) -> TankReading:
    return TankReading(
        timestamp=hour,
        level_mgal=int(round(level * 1000)),
        temperature_cdeg=1500,
        metered_sales_mgal=int(round(sold * 1000)),
        deliveries_mgal=int(round(delivered * 1000)),
    )


class TestMassBalance:
    def test_balanced_hour(self):
        assert mass_balance_residual(_reading(1, 106.0, sold=4.0, delivered=10.0), 100.0) == 0.0

    def test_missing_gallon(self):
        assert mass_balance_residual(_reading(1, 105.0, sold=4.0, delivered=10.0), 100.0) == pytest.approx(-1.0)

    def test_negative_previous_level_rejected(self):
        with pytest.raises(ValueError):
            mass_balance_residual(_reading(1, 10.0), -1.0)


class TestCusum:
    def test_zero_samples_stay_at_zero(self):
        state = cusum_run([0.0] * 100)
        assert state.s_pos == 0.0
        assert state.s_neg == 0.0
        assert not state.alarmed
        assert state.n == 100

    def test_infinite_threshold_never_alarms(self):
        state = cusum_run([-10.0] * 50, h=math.inf)
        assert not state.alarmed
        assert state.s_neg == pytest.approx(50 * 9.5)

    def test_step_change_matches_reference_loop(self):
        rng = np.random.default_rng(3)
        samples = rng.normal(0.0, 1.0, 120)
        samples[50:] -= 2.0
        k, h = 0.5, 5.0

        s_pos = s_neg = 0.0
        first = None
        for i, x in enumerate(samples):
            s_pos = max(0.0, s_pos + x - k)
            s_neg = max(0.0, s_neg - x - k)
            if first is None and (s_pos > h or s_neg > h):
                first = i

        state = cusum_run(samples, k=k, h=h)
        assert state.s_pos == pytest.approx(s_pos)
        assert state.s_neg == pytest.approx(s_neg)
        assert state.alarm_index == first
        assert first is not None and first >= 50

    def test_alarm_index_is_sticky(self):
        state = CusumState(k=0.0, h=1.0)
        state = cusum_update(state, 2.0)
        assert state.alarm_index == 0
        state = cusum_update(cusum_update(state, -5.0), -5.0)
        assert state.alarm_index == 0

    def test_reset_keeps_sample_count(self):
        state = cusum_run([3.0] * 10, h=1.0).reset()
        assert (state.s_pos, state.s_neg, state.alarmed, state.n) == (0.0, 0.0, False, 10)

    def test_negative_parameters_rejected(self):
        with pytest.raises(ValueError):
            CusumState(k=-0.1)


class TestLeakDetector:
    def test_short_warmup_rejected(self):
        with pytest.raises(ValueError):
            leak_detector(warmup_hours=1)

    def test_warmup_then_alarm_on_a_persistent_loss(self):
        detector = leak_detector(k=0.5, h=5.0, warmup_hours=4)
        rng = np.random.default_rng(0)
        level = 5000.0
        alerts = []
        detector, alert = leak_step(detector, _reading(0, level))
        assert alert is None and detector.prev_level == level

        for hour in range(1, 60):
            loss = 5.0 if hour >= 20 else 0.0
            noise = float(rng.normal(0.0, 0.2))
            level = level - 10.0 - loss + noise
            detector, alert = leak_step(detector, _reading(hour, level, sold=10.0))
            if alert is not None:
                alerts.append(alert)
            if hour == 4:
                assert detector.sigma is not None
                assert detector.sigma >= 0.5

        assert len(alerts) == 1
        alert = alerts[0]
        assert alert.kind is AlertKind.LEAK
        assert alert.severity is Severity.URGENT
        assert alert.asset_id == 'tank-1'
        assert 20 <= alert.timestamp < 30

    def test_quiet_tank_never_alarms(self):
        detector = leak_detector(warmup_hours=5)
        level = 8000.0
        for hour in range(200):
            level -= 12.0
            detector, alert = leak_step(detector, _reading(hour, level, sold=12.0))
            assert alert is None

    def test_rearm_clears_statistics(self):
        detector = LeakDetector(cusum=cusum_run([9.0] * 3, h=1.0), warmup_hours=2, sigma=1.0)
        rearmed = detector.rearm()
        assert not rearmed.cusum.alarmed
        assert rearmed.sigma == 1.0
