"""Tests for the canonical record line format."""

import pytest

from scripts.errors import WireFormatError
from scripts.governance.kpi import KPI_FIELD_NAMES
from scripts.telemetry.wire import (
    STREAM_FIELDS,
    LogHeader,
    TelemetryRecord,
    WireStream,
    decode_header,
    decode_record,
    encode_header,
    encode_record,
)

TANK_LINE = b'{"seq":1,"t":0,"stream":"tank","level_mgal":8000000,"temp_cdeg":1500,"sales_mgal":0,"deliv_mgal":0}\n'
TANK = TelemetryRecord(
    1, 0, WireStream.TANK, {'level_mgal': 8_000_000, 'temp_cdeg': 1500, 'sales_mgal': 0, 'deliv_mgal': 0}
)


class TestEncode:
    def test_tank_record_bytes(self):
        assert encode_record(TANK) == TANK_LINE

    def test_payload_order_does_not_matter(self):
        shuffled = TelemetryRecord(1, 0, WireStream.TANK, dict(reversed(list(TANK.payload.items()))))
        assert encode_record(shuffled) == TANK_LINE

    def test_lists_and_strings(self):
        record = TelemetryRecord(
            7, 3, WireStream.VISIT,
            {'offset_s': 12, 'user': -1, 'dispenser': 2, 'gal_mgal': 9500, 'price_mills': 3010,
             'basket': (4, 17), 'checkout_ms': 41000, 'kind': 'fuel'},
        )
        line = encode_record(record)
        assert b'"basket":[4,17]' in line
        assert b'"kind":"fuel"}' in line
        assert b' ' not in line

    def test_missing_field_rejected(self):
        with pytest.raises(ValueError):
            encode_record(TelemetryRecord(1, 0, WireStream.ORDER, {'qty_mgal': 5}))

    def test_float_rejected(self):
        with pytest.raises(ValueError):
            encode_record(TelemetryRecord(1, 0, WireStream.ORDER, {'qty_mgal': 5.0, 'arrival': 8}))

    def test_bool_rejected(self):
        with pytest.raises(ValueError):
            encode_record(TelemetryRecord(1, 0, WireStream.ORDER, {'qty_mgal': True, 'arrival': 8}))

    def test_quote_in_text_rejected(self):
        payload = {'asset': 'tank-1', 'kind': 'leak', 'severity': 'urgent', 'ts': 3, 'cost_cents': 1,
                   'detail': 'say "hi"'}
        with pytest.raises(ValueError):
            encode_record(TelemetryRecord(1, 0, WireStream.ALERT, payload))

    def test_kpi_stream_carries_every_report_field(self):
        assert tuple(name for name, _ in STREAM_FIELDS[WireStream.KPI]) == KPI_FIELD_NAMES


class TestDecode:
    def test_tank_line(self):
        record = decode_record(TANK_LINE)
        assert record == TANK

    def test_list_values_come_back_as_tuples(self):
        line = (
            b'{"seq":2,"t":0,"stream":"visit","offset_s":1,"user":3,"dispenser":0,"gal_mgal":0,'
            b'"price_mills":3000,"basket":[1,2],"checkout_ms":900,"kind":"shop"}\n'
        )
        assert decode_record(line).payload['basket'] == (1, 2)

    def test_missing_line_feed(self):
        with pytest.raises(WireFormatError) as excinfo:
            decode_record(TANK_LINE[:-1])
        assert excinfo.value.offset == len(TANK_LINE) - 1

    def test_truncated_line(self):
        with pytest.raises(WireFormatError):
            decode_record(TANK_LINE[:40] + b'\n')

    def test_deeply_nested_line(self):
        with pytest.raises(WireFormatError) as excinfo:
            decode_record(b'[' * 100_000 + b'\n')
        assert excinfo.value.offset == 0

    def test_unknown_stream(self):
        line = TANK_LINE.replace(b'"stream":"tank"', b'"stream":"pump"')
        with pytest.raises(WireFormatError) as excinfo:
            decode_record(line)
        assert excinfo.value.offset == line.index(b'"stream":')

    def test_whitespace_is_not_canonical(self):
        with pytest.raises(WireFormatError) as excinfo:
            decode_record(TANK_LINE.replace(b'"seq":1', b'"seq": 1'))
        assert excinfo.value.offset == 7

    def test_leading_zero_is_rejected(self):
        with pytest.raises(WireFormatError):
            decode_record(TANK_LINE.replace(b'"temp_cdeg":1500', b'"temp_cdeg":01500'))

    def test_float_is_rejected(self):
        with pytest.raises(WireFormatError):
            decode_record(TANK_LINE.replace(b'"sales_mgal":0', b'"sales_mgal":0.0'))

    def test_field_order_is_enforced(self):
        line = TANK_LINE.replace(b'"sales_mgal":0,"deliv_mgal":0', b'"deliv_mgal":0,"sales_mgal":0')
        with pytest.raises(WireFormatError) as excinfo:
            decode_record(line)
        assert excinfo.value.offset == line.index(b'"deliv_mgal"')

    def test_extra_field_rejected(self):
        with pytest.raises(WireFormatError):
            decode_record(TANK_LINE.replace(b'}\n', b',"extra":1}\n'))

    def test_non_printable_byte(self):
        with pytest.raises(WireFormatError) as excinfo:
            decode_record(TANK_LINE.replace(b'tank', b'ta\x01k'))
        assert excinfo.value.offset == TANK_LINE.index(b'tank') + 2

    def test_carriage_return_rejected(self):
        with pytest.raises(WireFormatError):
            decode_record(TANK_LINE[:-1] + b'\r\n')


class TestHeader:
    def test_round_trip_bytes(self):
        header = LogHeader(config_digest='0123456789abcdef', seed=42, initial_tank_mgal=8_000_000)
        line = encode_header(header)
        assert line == (
            b'{"format_version":1,"config_digest":"0123456789abcdef","seed":42,"initial_tank_mgal":8000000}\n'
        )
        assert decode_header(line) == header

    def test_record_is_not_a_header(self):
        with pytest.raises(WireFormatError):
            decode_header(TANK_LINE)
