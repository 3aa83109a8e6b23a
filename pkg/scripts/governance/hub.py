"""Daily governance loop: the station controller of a full run.

Every hour the hub records the hour's sales and makes the inventory
decision. At the end of hour 23 of each simulated day it runs the
governance tick, a fixed sequence of stages:

    1. forecast: refit the demand forecaster on the trailing window and
       publish forecasts for the next 24 hours;
    2. inventory: the ordering decision with the refreshed forecaster;
    3. pricing: swap a fresh Q-table snapshot into the greedy policy;
    4. monitors: run every detector over the day's telemetry;
    5. maintenance: book service slots for the new alerts;
    6. kpi: append the day's KpiReport.

A stage failure is raised as :class:`GovernanceStageError` naming the
stage and the day. The final, possibly partial, day gets its KPI row at
the end of the episode.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, TypeVar

from scripts.governance.inventory import (
    DemandForecaster,
    ForecasterSettings,
    InventoryPolicy,
    ReplenishmentController,
)
from scripts.governance.kpi import KpiReport, emit_kpi_report
from scripts.governance.maintenance import Booking, ServiceCalendar
from scripts.monitor.alerts import Alert, AlertKind
from scripts.monitor.fraud import DEFAULT_AUTH_WINDOW_S, dispenser_fraud
from scripts.monitor.spectrum import (
    DEFAULT_BAND_HALF_WIDTH,
    DEFAULT_RATIO_THRESHOLD,
    Spectrum,
    dft,
    fault_band,
    spectral_fault,
)
from scripts.monitor.tank import (
    DEFAULT_SLACK,
    DEFAULT_THRESHOLD,
    DEFAULT_WARMUP_HOURS,
    LeakDetector,
    leak_detector,
    leak_step,
)
from scripts.monitor.vehicle import BATTERY_Z_THRESHOLD, MIN_BATTERY_SERIES, battery_anomaly, tire_check
from scripts.pricing.policies import GreedyPricingPolicy
from scripts.pricing.qlearning import QTable
from scripts.sim.episode import ControlDecision, EpisodeLog, Repair, StationView
from scripts.sim.faults import vehicle_asset
from scripts.sim.sensors import AuthEvent
from scripts.sim.station import StationParams, to_mgal
from scripts.utils import logging_system as log

__all__ = [
    'GovernanceStageError',
    'MonitorSettings',
    'GovernanceHub',
    'STAGES',
]

logger = log.get_logger(__name__)

STAGES = ('forecast', 'inventory', 'pricing', 'monitor', 'maintenance', 'kpi')
_FORECAST_HOURS = 24
_SUPPRESSED_WHILE_OPEN = frozenset({AlertKind.LEAK, AlertKind.VIBRATION_FAULT})

T = TypeVar('T')


class GovernanceStageError(RuntimeError):
    """A governance stage failed; the original exception is chained."""

    def __init__(self, module: str, day: int, cause: BaseException) -> None:
        super().__init__(f"governance stage '{module}' failed on day {day}: {cause}")
        self.module = module
        self.day = day


@dataclass(frozen=True)
class MonitorSettings:
    """Detector thresholds used by the daily monitor stage."""

    enabled: bool = True
    cusum_k: float = DEFAULT_SLACK
    cusum_h: float = DEFAULT_THRESHOLD
    leak_warmup_hours: int = DEFAULT_WARMUP_HOURS
    vibration_ratio_threshold: float = DEFAULT_RATIO_THRESHOLD
    vibration_band_half_width: int = DEFAULT_BAND_HALF_WIDTH
    battery_z_threshold: float = BATTERY_Z_THRESHOLD
    battery_window: int = 40
    auth_window_s: int = DEFAULT_AUTH_WINDOW_S


@dataclass
class _MonitorState:
    leak: LeakDetector
    baselines: dict[str, Spectrum] = field(default_factory=dict)
    voltages: dict[int, list[tuple[int, float]]] = field(default_factory=dict)
    battery_alerted: set[int] = field(default_factory=set)
    auth_carry: list[AuthEvent] = field(default_factory=list)
    open_assets: dict[str, int] = field(default_factory=dict)
    leak_repair_at: Optional[int] = None


class GovernanceHub:
    """Full station controller: replenishment, monitoring, maintenance and KPIs.

    Args:
        policy: Replenishment policy.
        forecaster: Demand forecaster settings.
        monitors: Detector thresholds; ``monitors.enabled=False`` skips the
            monitor stage entirely.
        pricing: Greedy pricing policy refreshed by the tick, if any.
        table_source: Returns the Q-table to snapshot into ``pricing``.
        service_enabled: Book maintenance for alerts.
    """

    def __init__(
        self,
        policy: InventoryPolicy,
        forecaster: Optional[ForecasterSettings] = None,
        monitors: Optional[MonitorSettings] = None,
        *,
        pricing: Optional[GreedyPricingPolicy] = None,
        table_source: Optional[Callable[[], QTable]] = None,
        service_enabled: bool = True,
    ) -> None:
        self.monitors = monitors or MonitorSettings()
        self.replenishment = ReplenishmentController(policy, DemandForecaster(forecaster))
        self.pricing = pricing
        self.table_source = table_source
        self.service_enabled = service_enabled
        self.calendar = ServiceCalendar()
        self.bookings: list[Booking] = []
        self.reports: list[KpiReport] = []
        self._state = _MonitorState(
            leak=leak_detector(self.monitors.cusum_k, self.monitors.cusum_h, self.monitors.leak_warmup_hours)
        )
        self._last_reported = 0

    @property
    def policy(self) -> InventoryPolicy:
        return self.replenishment.policy

    @property
    def forecaster(self) -> DemandForecaster:
        return self.replenishment.forecaster

    def on_hour_end(self, view: StationView) -> ControlDecision:
        self.replenishment.observe(view.log.hourly_records[-1])
        if view.hour % 24 != 23:
            return ControlDecision(order_mgal=self.replenishment.order(view) or 0)
        return self.governance_tick(view)

    def on_episode_end(self, view: StationView) -> ControlDecision:
        end = view.hour + 1
        if end <= self._last_reported:
            return ControlDecision()
        day = self._last_reported // 24
        alerts = self._run(
            'monitor', day,
            lambda: self._monitor(view.log, self._last_reported, end, view.params) if self.monitors.enabled else [],
        )
        report = self._run('kpi', day, lambda: emit_kpi_report(view.log, self._last_reported, end).with_alerts(alerts))
        self.reports.append(report)
        self._last_reported = end
        return ControlDecision(alerts=tuple(alerts), reports=(report,))

    def governance_tick(self, view: StationView) -> ControlDecision:
        """Run the daily stages in order at the end of hour 23."""
        day = view.hour // 24
        start = self._last_reported
        end = view.hour + 1
        history = self.replenishment.history

        def publish() -> tuple[tuple[int, int], ...]:
            self.forecaster.refresh(history)
            path, _ = self.forecaster.forecast(history, _FORECAST_HOURS)
            return tuple((end + i, to_mgal(max(float(v), 0.0))) for i, v in enumerate(path))

        forecasts = self._run('forecast', day, publish)
        order = self._run('inventory', day, lambda: self.replenishment.order(view) or 0)
        self._run('pricing', day, self._refresh_pricing)
        alerts: list[Alert] = []
        if self.monitors.enabled:
            alerts = self._run('monitor', day, lambda: self._monitor(view.log, start, end, view.params))
        repairs = self._run('maintenance', day, lambda: self._book(alerts, view.hour))
        report = self._run('kpi', day, lambda: emit_kpi_report(view.log, start, end).with_alerts(alerts))
        self.reports.append(report)
        self._last_reported = end
        if alerts:
            logger.info(f"day {day}: {len(alerts)} alert(s), {len(repairs)} service booking(s)")
        return ControlDecision(
            order_mgal=order,
            alerts=tuple(alerts),
            repairs=tuple(repairs),
            forecasts=forecasts,
            reports=(report,),
        )

    @staticmethod
    def _run(module: str, day: int, stage: Callable[[], T]) -> T:
        try:
            return stage()
        except GovernanceStageError:
            raise
        except Exception as exc:
            raise GovernanceStageError(module, day, exc) from exc

    def _refresh_pricing(self) -> None:
        if self.pricing is not None and self.table_source is not None:
            self.pricing.refresh(self.table_source())

    def _monitor(self, episode: EpisodeLog, start: int, end: int, params: StationParams) -> list[Alert]:
        """Alerts raised by the telemetry of hours ``[start, end)``."""
        state = self._state
        settings = self.monitors
        alerts: list[Alert] = []
        for reading in episode.tank_between(start, end):
            if state.leak_repair_at is not None and reading.timestamp >= state.leak_repair_at:
                state.leak = state.leak.rearm()
                state.leak_repair_at = None
            state.leak, alert = leak_step(state.leak, reading)
            if alert is not None:
                alerts.append(alert)

        profile = params.vibration
        for frame in episode.frames_between(start, end):
            spectrum = dft(frame.signal(profile.sample_scale), frame.sample_rate_hz)
            baseline = state.baselines.setdefault(frame.asset_id, spectrum)
            if baseline is spectrum:
                continue
            band = fault_band(spectrum, profile.fault_hz, settings.vibration_band_half_width)
            alert = spectral_fault(
                spectrum, baseline, band, settings.vibration_ratio_threshold,
                asset_id=frame.asset_id, timestamp=frame.hour,
            )
            if alert is not None:
                alerts.append(alert)

        alerts.extend(self._vehicle_alerts(episode, start, end))

        auths = state.auth_carry + episode.auths_between(start, end)
        fraud: dict[str, Alert] = {}
        for alert in dispenser_fraud(episode.flows_between(start, end), auths, settings.auth_window_s):
            fraud.setdefault(alert.asset_id, alert)
        alerts.extend(fraud.values())
        horizon = end * 3600 - settings.auth_window_s
        state.auth_carry = [a for a in auths if a.t_s >= horizon]

        # an asset awaiting service raises no new equipment alert before its slot
        kept = [
            a for a in alerts
            if not (a.kind in _SUPPRESSED_WHILE_OPEN and a.timestamp < state.open_assets.get(a.asset_id, -1))
        ]
        state.open_assets = {asset: until for asset, until in state.open_assets.items() if until >= end}
        return kept

    def _vehicle_alerts(self, episode: EpisodeLog, start: int, end: int) -> list[Alert]:
        state = self._state
        settings = self.monitors
        alerts: list[Alert] = []
        tire_flagged: set[int] = set()
        scanned: set[int] = set()
        for reading in episode.vehicles_between(start, end):
            state.voltages.setdefault(reading.user_id, []).append((reading.timestamp, reading.battery_v))
            scanned.add(reading.user_id)
            if reading.user_id in tire_flagged:
                continue
            alert = tire_check(reading.tire_psi, asset_id=vehicle_asset(reading.user_id), timestamp=reading.timestamp)
            if alert is not None:
                tire_flagged.add(reading.user_id)
                alerts.append(alert)

        for user_id in sorted(scanned - state.battery_alerted):
            history = state.voltages[user_id][-settings.battery_window:]
            if len(history) < MIN_BATTERY_SERIES:
                continue
            alert = battery_anomaly(
                [v for _, v in history],
                asset_id=vehicle_asset(user_id),
                timestamps=[t for t, _ in history],
                z_threshold=settings.battery_z_threshold,
            )
            if alert is not None:
                state.battery_alerted.add(user_id)
                alerts.append(alert)
        return alerts

    def _book(self, alerts: list[Alert], hour: int) -> list[Repair]:
        if not self.service_enabled or not alerts:
            return []
        self.calendar.open_through(hour // 24)
        bookings = self.calendar.book(alerts, hour)
        self.bookings.extend(bookings)
        repairs: list[Repair] = []
        for booking in bookings:
            alert = booking.alert
            if alert.kind is AlertKind.FRAUD:
                continue
            repairs.append(Repair(booking.start_hour, alert.asset_id))
            self._state.open_assets[alert.asset_id] = booking.start_hour
            if alert.kind is AlertKind.LEAK:
                self._state.leak_repair_at = booking.start_hour
            if alert.kind is AlertKind.BATTERY:
                self._state.battery_alerted.discard(self._user_of(alert.asset_id))
                self._state.voltages.pop(self._user_of(alert.asset_id), None)
        return repairs

    @staticmethod
    def _user_of(asset_id: str) -> int:
        return int(asset_id.rsplit('-', 1)[1])
