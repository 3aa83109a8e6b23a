"""Daily KPI reports: a pure projection of the episode log.

Every field of :class:`KpiReport` is an exact integer (cents, mgal,
milliseconds or a count), so KPIs over a partition of days add up to the
whole-period KPI exactly. Derived ratios are computed on demand.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Sequence, Union

import pandas as pd

from scripts.monitor.alerts import Alert, AlertKind
from scripts.sim.demand import VisitKind
from scripts.sim.station import MGAL_PER_GALLON

if TYPE_CHECKING:
    from scripts.sim.episode import EpisodeLog

__all__ = [
    'KpiReport',
    'KPI_COLUMNS',
    'ALERT_FIELDS',
    'KPI_FIELD_NAMES',
    'emit_kpi_report',
    'kpi_frame',
    'write_kpi_csv',
    'read_kpi_csv',
    'format_kpi_table',
]

KPI_COLUMNS = [
    'period_start',
    'period_end',
    'total_margin',
    'gallons_sold',
    'stockout_customers',
    'holding_cost_total',
    'forecast_mse',
    'alerts_by_kind',
    'attach_rate',
    'mean_checkout_seconds',
    'fuel_visits',
    'end_tank_level',
]

ALERT_FIELDS: dict[AlertKind, str] = {
    AlertKind.LEAK: 'a_leak',
    AlertKind.VIBRATION_FAULT: 'a_vib',
    AlertKind.BATTERY: 'a_batt',
    AlertKind.TIRE: 'a_tire',
    AlertKind.FRAUD: 'a_fraud',
}
"""Report field holding the count of each alert kind."""


@dataclass(frozen=True)
class KpiReport:
    """KPIs of the hours ``[start, end)``.

    Attributes:
        start: First hour of the period.
        end: One past the last hour of the period.
        margin_cents: Fuel revenue minus wholesale cost.
        sold_mgal: Fuel sold.
        stockouts: Customers turned away by an empty tank.
        hold_cents: Inventory holding cost.
        fsq_mgal2: Sum of squared forecast errors over forecast hours.
        fpts: Hours that carried a forecast.
        baskets: Fueling visits with a shop basket.
        fuel_visits: Fueling visits.
        chk_ms: Total checkout time of served visits.
        chk_n: Served visits (fueling and shop-only).
        tank_mgal: Tank level at the end of the period.
    """

    start: int
    end: int
    margin_cents: int = 0
    sold_mgal: int = 0
    stockouts: int = 0
    hold_cents: int = 0
    fsq_mgal2: int = 0
    fpts: int = 0
    a_leak: int = 0
    a_vib: int = 0
    a_batt: int = 0
    a_tire: int = 0
    a_fraud: int = 0
    baskets: int = 0
    fuel_visits: int = 0
    chk_ms: int = 0
    chk_n: int = 0
    tank_mgal: int = 0

    @property
    def total_margin(self) -> float:
        return self.margin_cents / 100.0

    @property
    def gallons_sold(self) -> float:
        return self.sold_mgal / MGAL_PER_GALLON

    @property
    def holding_cost_total(self) -> float:
        return self.hold_cents / 100.0

    @property
    def forecast_mse(self) -> float:
        """Mean squared forecast error in gallons squared; 0 without forecasts."""
        if self.fpts == 0:
            return 0.0
        return self.fsq_mgal2 / self.fpts / (MGAL_PER_GALLON * MGAL_PER_GALLON)

    @property
    def alerts_by_kind(self) -> dict[AlertKind, int]:
        return {kind: getattr(self, name) for kind, name in ALERT_FIELDS.items()}

    @property
    def attach_rate(self) -> float:
        return self.baskets / self.fuel_visits if self.fuel_visits else 0.0

    @property
    def mean_checkout_seconds(self) -> float:
        return self.chk_ms / self.chk_n / 1000.0 if self.chk_n else 0.0

    @property
    def end_tank_level(self) -> float:
        return self.tank_mgal / MGAL_PER_GALLON

    def with_alerts(self, alerts: Iterable[Alert]) -> KpiReport:
        """Add alert counts raised at the end of the period."""
        counts = {name: getattr(self, name) for name in ALERT_FIELDS.values()}
        for alert in alerts:
            counts[ALERT_FIELDS[alert.kind]] += 1
        return replace(self, **counts)

    def wire_fields(self) -> dict[str, int]:
        """Integer fields in declaration order."""
        return asdict(self)

    def to_row(self) -> dict[str, object]:
        return {
            'period_start': self.start,
            'period_end': self.end,
            'total_margin': self.total_margin,
            'gallons_sold': self.gallons_sold,
            'stockout_customers': self.stockouts,
            'holding_cost_total': self.holding_cost_total,
            'forecast_mse': self.forecast_mse,
            'alerts_by_kind': ';'.join(f"{kind.value}={count}" for kind, count in self.alerts_by_kind.items()),
            'attach_rate': self.attach_rate,
            'mean_checkout_seconds': self.mean_checkout_seconds,
            'fuel_visits': self.fuel_visits,
            'end_tank_level': self.end_tank_level,
        }


KPI_FIELD_NAMES: tuple[str, ...] = tuple(f.name for f in fields(KpiReport))


def emit_kpi_report(log: 'EpisodeLog', start: int, end: int) -> KpiReport:
    """Aggregate hours ``[start, end)`` of ``log``.

    Raises:
        ValueError: The period is empty or outside the log.
    """
    if not 0 <= start < end <= log.n_hours:
        raise ValueError(f"period [{start}, {end}) is empty or outside the {log.n_hours}-hour log")
    records = log.hourly_records[start:end]
    counts = {name: 0 for name in ALERT_FIELDS.values()}
    fsq = 0
    fpts = 0
    for record in records:
        for alert in record.alerts:
            counts[ALERT_FIELDS[alert.kind]] += 1
        if record.forecast_mgal >= 0:
            error = record.forecast_mgal - record.gallons_sold_mgal
            fsq += error * error
            fpts += 1

    baskets = fuel_visits = chk_ms = chk_n = 0
    for visit in log.visits_between(start, end):
        if visit.kind is VisitKind.TURNED_AWAY:
            continue
        chk_ms += visit.checkout_ms
        chk_n += 1
        if visit.kind is VisitKind.FUEL:
            fuel_visits += 1
            if visit.basket:
                baskets += 1

    return KpiReport(
        start=start,
        end=end,
        margin_cents=sum(r.revenue_cents - r.cost_cents for r in records),
        sold_mgal=sum(r.gallons_sold_mgal for r in records),
        stockouts=sum(r.turned_away for r in records),
        hold_cents=sum(r.holding_cents for r in records),
        fsq_mgal2=fsq,
        fpts=fpts,
        baskets=baskets,
        fuel_visits=fuel_visits,
        chk_ms=chk_ms,
        chk_n=chk_n,
        tank_mgal=records[-1].tank_level_mgal,
        **counts,
    )


def kpi_frame(reports: Sequence[KpiReport]) -> pd.DataFrame:
    return pd.DataFrame([r.to_row() for r in reports], columns=KPI_COLUMNS)


def write_kpi_csv(path: Union[str, Path], reports: Sequence[KpiReport]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    kpi_frame(reports).to_csv(path, index=False, float_format='%.6f')
    return path


def read_kpi_csv(path: Union[str, Path]) -> pd.DataFrame:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"KPI file not found: {path}")
    frame = pd.read_csv(path)
    if list(frame.columns) != KPI_COLUMNS:
        raise ValueError(f"{path}: expected columns {KPI_COLUMNS}, got {list(frame.columns)}")
    return frame


def format_kpi_table(frame: pd.DataFrame) -> str:
    """Plain-text table of a KPI frame."""
    if frame.empty:
        return "(no KPI rows)"
    return frame.to_string(index=False, float_format=lambda v: f"{v:.2f}")
