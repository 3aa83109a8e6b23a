"""Telemetry event log: canonical wire format, frame sidecars and replay.

    - wire.py: record and header encoding/decoding
    - frames.py: ``VIB1`` vibration frame sidecars
    - event_log.py: assembling, writing and reading ``events.ndx``
    - replay.py: rebuilding an episode and its KPIs from a log
"""

from .event_log import read_event_log, write_event_log
from .replay import KpiMismatch, ReplayResult, replay
from .wire import TelemetryRecord, WireStream, decode_record, encode_record

__all__ = [
    'KpiMismatch',
    'ReplayResult',
    'TelemetryRecord',
    'WireStream',
    'decode_record',
    'encode_record',
    'read_event_log',
    'replay',
    'write_event_log',
]
