"""Rebuild an episode from its event log and re-derive its KPIs.

Replay is a pure function of the log: hourly records, visits and
telemetry are reconstructed field by field, and every KPI row embedded in
the log is recomputed from the reconstructed episode. Differences are
returned as :class:`KpiMismatch` values rather than raised.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Union

import config
from scripts.errors import WireFormatError
from scripts.governance.kpi import KpiReport, emit_kpi_report
from scripts.monitor.alerts import Alert, AlertKind, Severity
from scripts.sim.demand import CustomerVisit, VisitKind
from scripts.sim.episode import EpisodeLog, HourRecord, OrderRecord
from scripts.sim.exogenous import ExogenousState
from scripts.sim.sensors import AuthEvent, FlowEvent, TankReading, VehicleReading, VibrationFrame
from scripts.sim.station import MILLS_PER_DOLLAR
from scripts.telemetry.event_log import EventLogContents, read_event_log
from scripts.telemetry.frames import FRAME_SUFFIX, read_frame
from scripts.telemetry.wire import TelemetryRecord, WireStream
from scripts.utils import logging_system as log

__all__ = ['KpiMismatch', 'ReplayResult', 'replay', 'replay_contents']

logger = log.get_logger(__name__)

_INDEX_SCALE = 10_000


@dataclass(frozen=True)
class KpiMismatch:
    start: int
    end: int
    field: str
    embedded: int
    replayed: int


@dataclass
class ReplayResult:
    episode: EpisodeLog
    embedded: list[KpiReport] = field(default_factory=list)
    recomputed: list[KpiReport] = field(default_factory=list)
    mismatches: list[KpiMismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    @property
    def conserved(self) -> bool:
        """Deliveries minus sales minus leaks equals the change in tank level."""
        records = self.episode.hourly_records
        net = sum(r.delivered_mgal - r.gallons_sold_mgal - r.leak_mgal for r in records)
        return net == self.episode.final_tank_mgal - self.episode.initial_tank_mgal


def _exogenous(record: TelemetryRecord) -> ExogenousState:
    p = record.payload
    return ExogenousState(
        weather_index=int(p['weather_e4']) / _INDEX_SCALE,
        traffic_index=int(p['traffic_e4']) / _INDEX_SCALE,
        competitor_price=int(p['comp_mills']) / MILLS_PER_DOLLAR,
        wholesale_cost=int(p['whole_mills']) / MILLS_PER_DOLLAR,
        hour_of_day=record.t % 24,
        day_of_week=(record.t // 24) % 7,
        event_flag=bool(p['event']),
    )


def _hour_record(record: TelemetryRecord) -> HourRecord:
    p = record.payload
    return HourRecord(
        hour=record.t,
        exo=_exogenous(record),
        posted_price_mills=int(p['posted_mills']),
        gallons_sold_mgal=int(p['sold_mgal']),
        revenue_cents=int(p['rev_cents']),
        cost_cents=int(p['cost_cents']),
        visits=int(p['visits']),
        turned_away=int(p['turned_away']),
        tank_level_mgal=int(p['level_mgal']),
        delivered_mgal=int(p['deliv_mgal']),
        leak_mgal=int(p['leak_mgal']),
        holding_cents=int(p['hold_cents']),
        shop_revenue_cents=int(p['shop_cents']),
        retention_delta_ppm=int(p['retention_ppm']),
        forecast_mgal=int(p['fcst_mgal']),
    )


def _visit(record: TelemetryRecord) -> CustomerVisit:
    p = record.payload
    return CustomerVisit(
        hour=record.t,
        offset_s=int(p['offset_s']),
        user_id=int(p['user']),
        dispenser=int(p['dispenser']),
        gallons_mgal=int(p['gal_mgal']),
        price_mills=int(p['price_mills']),
        basket=tuple(p['basket']),
        checkout_ms=int(p['checkout_ms']),
        kind=VisitKind(p['kind']),
    )


def _alert(record: TelemetryRecord) -> Alert:
    p = record.payload
    return Alert(
        asset_id=str(p['asset']),
        kind=AlertKind(p['kind']),
        severity=Severity(p['severity']),
        timestamp=int(p['ts']),
        detail=str(p['detail']),
        estimated_cost_cents=int(p['cost_cents']),
    )


def _frame(record: TelemetryRecord, frames_dir: Optional[Path]) -> VibrationFrame:
    p = record.payload
    name = str(p['frame'])
    if not name.endswith(FRAME_SUFFIX) or '/' in name or name.startswith('.'):
        raise ValueError(f"invalid frame file name {name!r}")
    if frames_dir is None:
        raise ValueError("vibration frames need the run directory")
    samples = read_frame(frames_dir / name)
    if samples.size != int(p['n']):
        raise ValueError(f"frame {name} holds {samples.size} samples, log says {p['n']}")
    return VibrationFrame(
        frame_id=name[: -len(FRAME_SUFFIX)],
        asset_id=str(p['asset']),
        hour=record.t,
        sample_rate_hz=int(p['rate_hz']),
        samples=samples,
    )


def _rebuild(contents: EventLogContents, frames_dir: Optional[Path]) -> tuple[EpisodeLog, list[KpiReport]]:
    header = contents.header
    episode = EpisodeLog(
        config_digest=header.config_digest,
        seed=header.seed,
        initial_tank_mgal=header.initial_tank_mgal,
        detailed=False,
    )
    embedded: list[KpiReport] = []
    for record in contents.records:
        stream = record.stream
        p = record.payload
        try:
            if stream is WireStream.PRICE:
                if record.t != episode.n_hours:
                    raise ValueError(f"price record for hour {record.t}, expected hour {episode.n_hours}")
                episode.hourly_records.append(_hour_record(record))
                continue
            if record.t != episode.n_hours - 1:
                raise ValueError(f"{stream.value} record for hour {record.t} outside the current hour")
            if stream is WireStream.VISIT:
                episode.visit_records.append(_visit(record))
            elif stream is WireStream.AUTH:
                episode.auth_events.append(AuthEvent(int(p['t_s']), int(p['dispenser']), int(p['user'])))
            elif stream is WireStream.DISPENSER_FLOW:
                episode.flow_events.append(FlowEvent(int(p['t_s']), int(p['dispenser']), int(p['volume_mgal'])))
            elif stream is WireStream.TANK:
                episode.detailed = True
                episode.tank_readings.append(
                    TankReading(record.t, int(p['level_mgal']), int(p['temp_cdeg']),
                                int(p['sales_mgal']), int(p['deliv_mgal']))
                )
            elif stream is WireStream.VEHICLE:
                episode.vehicle_readings.append(
                    VehicleReading(record.t, int(p['offset_s']), int(p['user']),
                                   int(p['tire_dpsi']), int(p['battery_mv']))
                )
            elif stream is WireStream.VIBRATION_FRAME_REF:
                episode.frames.append(_frame(record, frames_dir))
            elif stream is WireStream.ORDER:
                episode.orders.append(OrderRecord(record.t, int(p['qty_mgal']), int(p['arrival'])))
            elif stream is WireStream.ALERT:
                last = episode.hourly_records[-1]
                episode.hourly_records[-1] = replace(last, alerts=last.alerts + (_alert(record),))
            elif stream is WireStream.KPI:
                embedded.append(KpiReport(**{name: int(value) for name, value in p.items()}))
        except (ValueError, TypeError) as exc:
            raise WireFormatError(f"record seq {record.seq}: {exc}", offset=0) from exc
    return episode, embedded


def _compare(embedded: KpiReport, replayed: KpiReport) -> list[KpiMismatch]:
    return [
        KpiMismatch(embedded.start, embedded.end, f.name, getattr(embedded, f.name), getattr(replayed, f.name))
        for f in fields(KpiReport)
        if getattr(embedded, f.name) != getattr(replayed, f.name)
    ]


def replay_contents(contents: EventLogContents, frames_dir: Optional[Path] = None) -> ReplayResult:
    """Rebuild the episode of a parsed log and recompute its KPI rows."""
    episode, embedded = _rebuild(contents, frames_dir)
    result = ReplayResult(episode=episode, embedded=embedded)
    for report in embedded:
        try:
            recomputed = emit_kpi_report(episode, report.start, report.end)
        except ValueError as exc:
            raise WireFormatError(f"kpi period [{report.start}, {report.end}): {exc}", offset=0) from exc
        result.recomputed.append(recomputed)
        result.mismatches.extend(_compare(report, recomputed))
    episode.kpi_rows.extend(result.recomputed)
    logger.debug(
        f"replayed {episode.n_hours} hours, {len(embedded)} KPI rows, {len(result.mismatches)} mismatch(es)"
    )
    return result


def replay(path: Union[str, Path]) -> ReplayResult:
    """Replay the event log at ``path`` (a run directory or the log file itself).

    Raises:
        FileNotFoundError: The log or a referenced frame is missing.
        WireFormatError: The log is malformed or has an unsupported header.
    """
    path = Path(path)
    if path.is_dir():
        path = path / config.EVENTS_FILE
    contents = read_event_log(path)
    return replay_contents(contents, path.parent / config.FRAMES_DIR)
