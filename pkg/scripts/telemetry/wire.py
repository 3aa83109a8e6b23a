"""Canonical line format of the telemetry event log.

One record per line, terminated by a single line feed::

    {"seq":1,"t":0,"stream":"tank","level_mgal":8000000,"temp_cdeg":1500,"sales_mgal":0,"deliv_mgal":0}

``seq``, ``t`` and ``stream`` come first, then the stream's fields in the
order of :data:`STREAM_FIELDS`. Values are decimal integers, strings of
printable ASCII without ``"`` or ``\\``, or flat lists of integers. No
whitespace and no floating point appear anywhere, so a record's bytes are
a function of its field values alone.

Scaled fields: ``*_mgal`` thousandths of a gallon, ``*_mills`` thousandths
of a dollar, ``*_cents`` cents, ``*_cdeg`` hundredths of a degree C,
``*_dpsi`` tenths of a psi, ``*_mv`` millivolts, ``*_e4`` ten-thousandths,
``*_ppm`` millionths, ``*_ms`` milliseconds.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Union

from scripts.errors import WireFormatError
from scripts.governance.kpi import KPI_FIELD_NAMES

__all__ = [
    'FORMAT_VERSION',
    'WireStream',
    'FieldKind',
    'STREAM_FIELDS',
    'HEADER_FIELDS',
    'TelemetryRecord',
    'LogHeader',
    'WireValue',
    'encode_record',
    'decode_record',
    'encode_header',
    'decode_header',
]

FORMAT_VERSION = 1

WireValue = Union[int, str, tuple[int, ...]]


class WireStream(str, Enum):
    TANK = 'tank'
    DISPENSER_FLOW = 'dispenser_flow'
    AUTH = 'auth'
    VIBRATION_FRAME_REF = 'vibration_frame_ref'
    VEHICLE = 'vehicle'
    VISIT = 'visit'
    PRICE = 'price'
    ORDER = 'order'
    ALERT = 'alert'
    KPI = 'kpi'


class FieldKind(str, Enum):
    INT = 'int'
    STR = 'str'
    INTS = 'ints'


_I = FieldKind.INT
_S = FieldKind.STR
_L = FieldKind.INTS

STREAM_FIELDS: dict[WireStream, tuple[tuple[str, FieldKind], ...]] = {
    WireStream.TANK: (('level_mgal', _I), ('temp_cdeg', _I), ('sales_mgal', _I), ('deliv_mgal', _I)),
    WireStream.DISPENSER_FLOW: (('t_s', _I), ('dispenser', _I), ('volume_mgal', _I)),
    WireStream.AUTH: (('t_s', _I), ('dispenser', _I), ('user', _I)),
    WireStream.VIBRATION_FRAME_REF: (('asset', _S), ('frame', _S), ('rate_hz', _I), ('n', _I)),
    WireStream.VEHICLE: (('offset_s', _I), ('user', _I), ('tire_dpsi', _I), ('battery_mv', _I)),
    WireStream.VISIT: (
        ('offset_s', _I), ('user', _I), ('dispenser', _I), ('gal_mgal', _I), ('price_mills', _I),
        ('basket', _L), ('checkout_ms', _I), ('kind', _S),
    ),
    WireStream.PRICE: (
        ('posted_mills', _I), ('comp_mills', _I), ('whole_mills', _I), ('weather_e4', _I),
        ('traffic_e4', _I), ('event', _I), ('sold_mgal', _I), ('rev_cents', _I), ('cost_cents', _I),
        ('visits', _I), ('turned_away', _I), ('level_mgal', _I), ('deliv_mgal', _I), ('leak_mgal', _I),
        ('hold_cents', _I), ('shop_cents', _I), ('retention_ppm', _I), ('fcst_mgal', _I),
    ),
    WireStream.ORDER: (('qty_mgal', _I), ('arrival', _I)),
    WireStream.ALERT: (
        ('asset', _S), ('kind', _S), ('severity', _S), ('ts', _I), ('cost_cents', _I), ('detail', _S),
    ),
    WireStream.KPI: tuple((name, _I) for name in KPI_FIELD_NAMES),
}
"""Field names and kinds of every stream, in wire order."""

HEADER_FIELDS: tuple[tuple[str, FieldKind], ...] = (
    ('format_version', _I), ('config_digest', _S), ('seed', _I), ('initial_tank_mgal', _I),
)

_PREFIX = (('seq', _I), ('t', _I), ('stream', _S))


@dataclass(frozen=True)
class TelemetryRecord:
    """One log line: sequence number, hour, stream and the stream's payload."""

    seq: int
    t: int
    stream: WireStream
    payload: Mapping[str, WireValue] = field(default_factory=dict)


@dataclass(frozen=True)
class LogHeader:
    config_digest: str
    seed: int
    initial_tank_mgal: int
    format_version: int = FORMAT_VERSION


def _valid_text(value: str) -> bool:
    return all(0x20 <= ord(ch) <= 0x7E and ch not in '"\\' for ch in value)


def _encode_value(name: str, kind: FieldKind, value: object) -> str:
    if kind is FieldKind.INT:
        if type(value) is not int:
            raise ValueError(f"field {name!r} must be an int, got {type(value).__name__}")
        return str(value)
    if kind is FieldKind.STR:
        if not isinstance(value, str) or not _valid_text(value):
            raise ValueError(f"field {name!r} must be printable ASCII without quotes or backslashes")
        return f'"{value}"'
    if not isinstance(value, (tuple, list)) or any(type(v) is not int for v in value):
        raise ValueError(f"field {name!r} must be a list of ints")
    return '[' + ','.join(str(v) for v in value) + ']'


def _encode_object(pairs: list[tuple[str, FieldKind, object]]) -> bytes:
    body = ','.join(f'"{name}":{_encode_value(name, kind, value)}' for name, kind, value in pairs)
    return ('{' + body + '}\n').encode('ascii')


def encode_record(record: TelemetryRecord) -> bytes:
    """Canonical bytes of ``record``, line feed included.

    Raises:
        ValueError: Unknown stream, missing or extra fields, or a value of
            the wrong kind.
    """
    try:
        stream = WireStream(record.stream)
    except ValueError:
        raise ValueError(f"unknown stream {record.stream!r}") from None
    layout = STREAM_FIELDS[stream]
    names = [name for name, _ in layout]
    if set(record.payload) != set(names):
        missing = sorted(set(names) - set(record.payload))
        extra = sorted(set(record.payload) - set(names))
        raise ValueError(f"{stream.value} payload mismatch: missing {missing}, unexpected {extra}")
    pairs: list[tuple[str, FieldKind, object]] = [
        ('seq', _I, record.seq), ('t', _I, record.t), ('stream', _S, stream.value)
    ]
    pairs.extend((name, kind, record.payload[name]) for name, kind in layout)
    return _encode_object(pairs)


def encode_header(header: LogHeader) -> bytes:
    return _encode_object([
        ('format_version', _I, header.format_version),
        ('config_digest', _S, header.config_digest),
        ('seed', _I, header.seed),
        ('initial_tank_mgal', _I, header.initial_tank_mgal),
    ])


def _first_difference(a: bytes, b: bytes) -> int:
    for index, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return index
    return min(len(a), len(b))


def _parse_pairs(line: bytes) -> list[tuple[str, object]]:
    if not line.endswith(b'\n'):
        raise WireFormatError("line is not terminated by a line feed", offset=len(line))
    body = line[:-1]
    for index, byte in enumerate(body):
        if not 0x20 <= byte <= 0x7E:
            raise WireFormatError(f"non-printable byte 0x{byte:02x}", offset=index)
    try:
        pairs = json.loads(body.decode('ascii'), object_pairs_hook=lambda p: p)
    except json.JSONDecodeError as exc:
        raise WireFormatError(f"malformed object: {exc.msg}", offset=exc.pos) from None
    except RecursionError:
        raise WireFormatError("malformed object: nesting too deep", offset=0) from None
    except ValueError as exc:
        raise WireFormatError(f"unparseable value: {exc}", offset=0) from None
    if not isinstance(pairs, list) or not all(isinstance(p, tuple) for p in pairs):
        raise WireFormatError("line is not an object", offset=0)
    return pairs


def _take(
    pairs: list[tuple[str, object]], layout: tuple[tuple[str, FieldKind], ...], line: bytes, start: int
) -> dict[str, WireValue]:
    values: dict[str, WireValue] = {}
    for position, (name, kind) in enumerate(layout, start):
        if position >= len(pairs):
            raise WireFormatError(f"missing field {name!r}", offset=len(line) - 1)
        key, value = pairs[position]
        if key != name:
            offset = max(line.find(f'"{key}"'.encode('ascii')), 0)
            raise WireFormatError(f"expected field {name!r}, found {key!r}", offset=offset)
        if kind is FieldKind.INTS and isinstance(value, list):
            value = tuple(value)
        ok = (
            (kind is FieldKind.INT and type(value) is int)
            or (kind is FieldKind.STR and isinstance(value, str) and _valid_text(value))
            or (kind is FieldKind.INTS and isinstance(value, tuple) and all(type(v) is int for v in value))
        )
        if not ok:
            offset = max(line.find(f'"{key}":'.encode('ascii')), 0)
            raise WireFormatError(f"field {name!r} is not a valid {kind.value}", offset=offset)
        values[name] = value
    if len(pairs) > start + len(layout):
        extra = pairs[start + len(layout)][0]
        offset = max(line.find(f'"{extra}"'.encode('ascii')), 0)
        raise WireFormatError(f"unexpected field {extra!r}", offset=offset)
    return values


def _require_canonical(line: bytes, canonical: bytes) -> None:
    if canonical != line:
        raise WireFormatError("line is not in canonical form", offset=_first_difference(line, canonical))


def decode_record(line: bytes) -> TelemetryRecord:
    """Parse one canonical record line.

    Raises:
        WireFormatError: Anything but the canonical form, with the byte
            offset of the problem.
    """
    pairs = _parse_pairs(line)
    head = _take(pairs[:3], _PREFIX, line, 0) if len(pairs) >= 3 else None
    if head is None:
        raise WireFormatError("record needs seq, t and stream", offset=len(line) - 1)
    try:
        stream = WireStream(head['stream'])
    except ValueError:
        offset = max(line.find(b'"stream":'), 0)
        raise WireFormatError(f"unknown stream {head['stream']!r}", offset=offset) from None
    payload = _take(pairs, STREAM_FIELDS[stream], line, 3)
    record = TelemetryRecord(int(head['seq']), int(head['t']), stream, payload)
    _require_canonical(line, encode_record(record))
    return record


def decode_header(line: bytes) -> LogHeader:
    pairs = _parse_pairs(line)
    values = _take(pairs, HEADER_FIELDS, line, 0)
    header = LogHeader(
        config_digest=str(values['config_digest']),
        seed=int(values['seed']),
        initial_tank_mgal=int(values['initial_tank_mgal']),
        format_version=int(values['format_version']),
    )
    _require_canonical(line, encode_header(header))
    return header
