"""Binary sidecar files for vibration frames.

Layout: the 4-byte magic ``VIB1``, the sample count as a little-endian
u32, then the samples as little-endian signed 16-bit integers.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Union

import numpy as np

from scripts.errors import WireFormatError

__all__ = ['FRAME_MAGIC', 'FRAME_SUFFIX', 'encode_frame', 'decode_frame', 'write_frame', 'read_frame']

FRAME_MAGIC = b'VIB1'
FRAME_SUFFIX = '.vib'
_HEADER = struct.Struct('<4sI')


def encode_frame(samples: np.ndarray) -> bytes:
    samples = np.asarray(samples)
    if samples.ndim != 1:
        raise ValueError(f"frame samples must be 1-D, got shape {samples.shape}")
    if samples.size and (samples.min() < -32768 or samples.max() > 32767):
        raise ValueError("frame samples do not fit in 16 bits")
    return _HEADER.pack(FRAME_MAGIC, samples.size) + samples.astype('<i2').tobytes()


def decode_frame(data: bytes) -> np.ndarray:
    """Samples of a sidecar file as ``int16``.

    Raises:
        WireFormatError: Bad magic, or a length that disagrees with the header.
    """
    if len(data) < _HEADER.size:
        raise WireFormatError("frame shorter than its header", offset=len(data))
    magic, count = _HEADER.unpack_from(data)
    if magic != FRAME_MAGIC:
        raise WireFormatError(f"bad frame magic {magic!r}", offset=0)
    expected = _HEADER.size + 2 * count
    if len(data) != expected:
        raise WireFormatError(f"frame holds {len(data)} bytes, header implies {expected}", offset=min(len(data), expected))
    return np.frombuffer(data, dtype='<i2', offset=_HEADER.size).astype(np.int16)


def write_frame(directory: Union[str, Path], frame_id: str, samples: np.ndarray) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / f"{frame_id}{FRAME_SUFFIX}"
    path.write_bytes(encode_frame(samples))
    return path


def read_frame(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"vibration frame not found: {path}")
    return decode_frame(path.read_bytes())
