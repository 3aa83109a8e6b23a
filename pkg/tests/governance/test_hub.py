"""Tests for the daily governance loop."""

import pytest

from scripts.governance.hub import STAGES, GovernanceHub, GovernanceStageError, MonitorSettings
from scripts.governance.inventory import InventoryPolicy
from scripts.monitor.alerts import AlertKind
from scripts.pricing.policies import FixedMarginPolicy, GreedyPricingPolicy
from scripts.pricing.qlearning import QTable
from scripts.sim.episode import SimulationConfig, run_episode
from scripts.sim.faults import FaultInjection, FaultKind


def test_stage_order():
    assert STAGES == ('forecast', 'inventory', 'pricing', 'monitor', 'maintenance', 'kpi')


def test_one_report_per_day_and_a_partial_last_day():
    hub = GovernanceHub(InventoryPolicy())
    episode = run_episode(SimulationConfig(seed=4), FixedMarginPolicy(), hub, 60)
    assert [(r.start, r.end) for r in hub.reports] == [(0, 24), (24, 48), (48, 60)]
    assert episode.kpi_rows == hub.reports


def test_forecasts_are_published_for_the_next_day():
    hub = GovernanceHub(InventoryPolicy())
    episode = run_episode(SimulationConfig(seed=4), FixedMarginPolicy(), hub, 48)
    assert all(r.forecast_mgal == -1 for r in episode.hourly_records[:24])
    assert all(r.forecast_mgal >= 0 for r in episode.hourly_records[24:])
    assert hub.reports[1].fpts == 24


def test_failing_stage_names_itself():
    def broken() -> QTable:
        raise RuntimeError('table store offline')

    hub = GovernanceHub(InventoryPolicy(), pricing=GreedyPricingPolicy(QTable.zeros()), table_source=broken)
    with pytest.raises(GovernanceStageError) as excinfo:
        run_episode(SimulationConfig(seed=4), FixedMarginPolicy(), hub, 24)
    assert excinfo.value.module == 'pricing'
    assert excinfo.value.day == 0
    assert isinstance(excinfo.value.__cause__, RuntimeError)


def test_leak_is_detected_and_booked():
    leak = FaultInjection(FaultKind.LEAK, start_hour=50, magnitude=0.005)
    hub = GovernanceHub(InventoryPolicy())
    episode = run_episode(SimulationConfig(seed=4, faults=(leak,)), FixedMarginPolicy(), hub, 96)
    leaks = [a for r in episode.hourly_records for a in r.alerts if a.kind is AlertKind.LEAK]
    assert len(leaks) >= 1
    assert 50 <= leaks[0].timestamp < 72
    booking = next(b for b in hub.bookings if b.alert.kind is AlertKind.LEAK)
    assert booking.start_hour > 71
    assert booking.start_hour % 24 in (9, 14)


def test_disabled_monitors_raise_nothing():
    leak = FaultInjection(FaultKind.LEAK, start_hour=30, magnitude=0.005)
    hub = GovernanceHub(InventoryPolicy(), monitors=MonitorSettings(enabled=False))
    episode = run_episode(SimulationConfig(seed=4, faults=(leak,)), FixedMarginPolicy(), hub, 72)
    assert not any(r.alerts for r in episode.hourly_records)
    assert hub.bookings == []
