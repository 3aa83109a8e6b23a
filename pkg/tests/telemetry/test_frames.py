"""Tests for VIB1 vibration frame sidecars."""

import numpy as np
import pytest

from scripts.errors import WireFormatError
from scripts.telemetry.frames import decode_frame, encode_frame, read_frame, write_frame


def test_layout():
    data = encode_frame(np.array([1, -2, 32767], dtype=np.int16))
    assert data[:4] == b'VIB1'
    assert data[4:8] == (3).to_bytes(4, 'little')
    assert data[8:] == b'\x01\x00\xfe\xff\xff\x7f'


def test_file_round_trip(tmp_path):
    samples = np.arange(-512, 512, dtype=np.int16)
    path = write_frame(tmp_path / 'frames', 'h00012-dispenser-1', samples)
    assert path.name == 'h00012-dispenser-1.vib'
    loaded = read_frame(path)
    assert loaded.dtype == np.int16
    assert np.array_equal(loaded, samples)


def test_bad_magic():
    data = b'VIB2' + encode_frame(np.zeros(4, dtype=np.int16))[4:]
    with pytest.raises(WireFormatError) as excinfo:
        decode_frame(data)
    assert excinfo.value.offset == 0


def test_length_disagrees_with_header():
    with pytest.raises(WireFormatError):
        decode_frame(encode_frame(np.zeros(4, dtype=np.int16))[:-1])


def test_shorter_than_header():
    with pytest.raises(WireFormatError):
        decode_frame(b'VIB')


def test_out_of_range_samples_rejected():
    with pytest.raises(ValueError):
        encode_frame(np.array([40000]))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        read_frame(tmp_path / 'nope.vib')
