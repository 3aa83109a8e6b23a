"""Event log assembly, writing and reading.

A log is the header line followed by the records of every hour. Within an
hour, records appear in a fixed stream order:

    price, visit, auth, dispenser_flow, tank, vehicle,
    vibration_frame_ref, order, alert, kpi

``price`` carries the hour's accounting, ``alert`` records belong to the
hour record they were attached to (their own evidence hour is ``ts``) and
``kpi`` records are emitted in the hour their period ends. ``seq`` counts
records from 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import groupby
from pathlib import Path
from typing import Callable, Iterable, Iterator, TypeVar, Union

import config
from scripts.errors import WireFormatError
from scripts.governance.kpi import KpiReport
from scripts.monitor.alerts import Alert
from scripts.sim.demand import CustomerVisit
from scripts.sim.episode import EpisodeLog, HourRecord, OrderRecord
from scripts.sim.sensors import AuthEvent, FlowEvent, TankReading, VehicleReading, VibrationFrame
from scripts.telemetry.frames import FRAME_SUFFIX, write_frame
from scripts.telemetry.wire import (
    FORMAT_VERSION,
    LogHeader,
    TelemetryRecord,
    WireStream,
    decode_header,
    decode_record,
    encode_header,
    encode_record,
)
from scripts.utils import logging_system as log

__all__ = [
    'EventLogContents',
    'episode_records',
    'header_of',
    'write_event_log',
    'read_event_log',
    'iter_log_lines',
]

logger = log.get_logger(__name__)

_INDEX_SCALE = 10_000

T = TypeVar('T')


@dataclass(frozen=True)
class EventLogContents:
    header: LogHeader
    records: list[TelemetryRecord]


def header_of(episode: EpisodeLog) -> LogHeader:
    return LogHeader(
        config_digest=episode.config_digest,
        seed=episode.seed,
        initial_tank_mgal=episode.initial_tank_mgal,
    )


def _price_payload(record: HourRecord) -> dict[str, int]:
    exo = record.exo
    return {
        'posted_mills': record.posted_price_mills,
        'comp_mills': exo.competitor_mills,
        'whole_mills': exo.wholesale_mills,
        'weather_e4': int(round(exo.weather_index * _INDEX_SCALE)),
        'traffic_e4': int(round(exo.traffic_index * _INDEX_SCALE)),
        'event': int(exo.event_flag),
        'sold_mgal': record.gallons_sold_mgal,
        'rev_cents': record.revenue_cents,
        'cost_cents': record.cost_cents,
        'visits': record.visits,
        'turned_away': record.turned_away,
        'level_mgal': record.tank_level_mgal,
        'deliv_mgal': record.delivered_mgal,
        'leak_mgal': record.leak_mgal,
        'hold_cents': record.holding_cents,
        'shop_cents': record.shop_revenue_cents,
        'retention_ppm': record.retention_delta_ppm,
        'fcst_mgal': record.forecast_mgal,
    }


def _visit_payload(visit: CustomerVisit) -> dict[str, object]:
    return {
        'offset_s': visit.offset_s,
        'user': visit.user_id,
        'dispenser': visit.dispenser,
        'gal_mgal': visit.gallons_mgal,
        'price_mills': visit.price_mills,
        'basket': tuple(visit.basket),
        'checkout_ms': visit.checkout_ms,
        'kind': visit.kind.value,
    }


def _auth_payload(event: AuthEvent) -> dict[str, int]:
    return {'t_s': event.t_s, 'dispenser': event.dispenser, 'user': event.user_id}


def _flow_payload(event: FlowEvent) -> dict[str, int]:
    return {'t_s': event.t_s, 'dispenser': event.dispenser, 'volume_mgal': event.volume_mgal}


def _tank_payload(reading: TankReading) -> dict[str, int]:
    return {
        'level_mgal': reading.level_mgal,
        'temp_cdeg': reading.temperature_cdeg,
        'sales_mgal': reading.metered_sales_mgal,
        'deliv_mgal': reading.deliveries_mgal,
    }


def _vehicle_payload(reading: VehicleReading) -> dict[str, int]:
    return {
        'offset_s': reading.offset_s,
        'user': reading.user_id,
        'tire_dpsi': reading.tire_dpsi,
        'battery_mv': reading.battery_mv,
    }


def _frame_payload(frame: VibrationFrame) -> dict[str, object]:
    return {
        'asset': frame.asset_id,
        'frame': f"{frame.frame_id}{FRAME_SUFFIX}",
        'rate_hz': frame.sample_rate_hz,
        'n': int(frame.samples.size),
    }


def _order_payload(order: OrderRecord) -> dict[str, int]:
    return {'qty_mgal': order.qty_mgal, 'arrival': order.arrival_hour}


def _alert_payload(alert: Alert) -> dict[str, object]:
    return {
        'asset': alert.asset_id,
        'kind': alert.kind.value,
        'severity': alert.severity.value,
        'ts': alert.timestamp,
        'cost_cents': alert.estimated_cost_cents,
        'detail': alert.detail,
    }


def _kpi_payload(report: KpiReport) -> dict[str, int]:
    return report.wire_fields()


def _by_hour(items: Iterable[T], hour_of: Callable[[T], int]) -> dict[int, list[T]]:
    return {hour: list(group) for hour, group in groupby(items, key=hour_of)}


def episode_records(episode: EpisodeLog) -> Iterator[TelemetryRecord]:
    """Records of ``episode`` in log order."""
    visits = _by_hour(episode.visit_records, lambda v: v.hour)
    auths = _by_hour(episode.auth_events, lambda e: e.t_s // 3600)
    flows = _by_hour(episode.flow_events, lambda e: e.t_s // 3600)
    tanks = _by_hour(episode.tank_readings, lambda r: r.timestamp)
    vehicles = _by_hour(episode.vehicle_readings, lambda r: r.timestamp)
    frames = _by_hour(episode.frames, lambda f: f.hour)
    orders = _by_hour(episode.orders, lambda o: o.hour)
    kpis = _by_hour(episode.kpi_rows, lambda k: k.end - 1)

    seq = 0
    for record in episode.hourly_records:
        hour = record.hour
        blocks = (
            (WireStream.PRICE, [_price_payload(record)]),
            (WireStream.VISIT, [_visit_payload(v) for v in visits.get(hour, ())]),
            (WireStream.AUTH, [_auth_payload(e) for e in auths.get(hour, ())]),
            (WireStream.DISPENSER_FLOW, [_flow_payload(e) for e in flows.get(hour, ())]),
            (WireStream.TANK, [_tank_payload(r) for r in tanks.get(hour, ())]),
            (WireStream.VEHICLE, [_vehicle_payload(r) for r in vehicles.get(hour, ())]),
            (WireStream.VIBRATION_FRAME_REF, [_frame_payload(f) for f in frames.get(hour, ())]),
            (WireStream.ORDER, [_order_payload(o) for o in orders.get(hour, ())]),
            (WireStream.ALERT, [_alert_payload(a) for a in record.alerts]),
            (WireStream.KPI, [_kpi_payload(k) for k in kpis.get(hour, ())]),
        )
        for stream, payloads in blocks:
            for payload in payloads:
                seq += 1
                yield TelemetryRecord(seq, hour, stream, payload)


def write_event_log(run_dir: Union[str, Path], episode: EpisodeLog) -> Path:
    """Write ``events.ndx`` and the vibration sidecars under ``run_dir``."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    path = run_dir / config.EVENTS_FILE
    count = 0
    with open(path, 'wb') as handle:
        handle.write(encode_header(header_of(episode)))
        for record in episode_records(episode):
            handle.write(encode_record(record))
            count += 1
    frames_dir = run_dir / config.FRAMES_DIR
    for frame in episode.frames:
        write_frame(frames_dir, frame.frame_id, frame.samples)
    logger.info(f"wrote {count} records and {len(episode.frames)} frames to {run_dir}")
    return path


def iter_log_lines(path: Union[str, Path]) -> Iterator[tuple[int, bytes]]:
    """``(line_number, line)`` pairs of a log file, line feeds kept."""
    with open(path, 'rb') as handle:
        for number, line in enumerate(handle, 1):
            yield number, line


def read_event_log(path: Union[str, Path]) -> EventLogContents:
    """Parse and validate a whole event log.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        WireFormatError: Empty file, bad header or version, a malformed
            line, or a sequence number that does not increase.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"event log not found: {path}")
    lines = iter_log_lines(path)
    first = next(lines, None)
    if first is None:
        raise WireFormatError("event log is empty", offset=0, line_number=1)
    try:
        header = decode_header(first[1])
    except WireFormatError as exc:
        raise WireFormatError(f"bad header: {exc.reason}", offset=exc.offset, line_number=1) from None
    if header.format_version != FORMAT_VERSION:
        raise WireFormatError(
            f"unsupported format_version {header.format_version}, expected {FORMAT_VERSION}",
            offset=0,
            line_number=1,
        )

    records: list[TelemetryRecord] = []
    previous = 0
    for number, line in lines:
        try:
            record = decode_record(line)
        except WireFormatError as exc:
            raise WireFormatError(exc.reason, offset=exc.offset, line_number=number) from None
        if record.seq <= previous:
            raise WireFormatError(
                f"sequence number {record.seq} does not follow {previous}",
                offset=0,
                line_number=number,
                seq_pair=(previous, record.seq),
            )
        previous = record.seq
        records.append(record)
    logger.debug(f"read {len(records)} records from {path}")
    return EventLogContents(header, records)
