"""Radix-2 FFT and the dispenser vibration band-energy rule.

:func:`fft_radix2` is an iterative decimation-in-time Cooley-Tukey
transform: one bit-reversal permutation, then ``log2(N)`` butterfly
stages, each stage vectorized over all of its butterfly groups at once.
It computes

    X_k = sum_n x_n * exp(-2j * pi * k * n / N)

with no normalization, so Parseval reads ``sum|x|^2 == sum|X|^2 / N``.

A dispenser fault shows up as extra energy in a narrow band around the
fault frequency. :func:`spectral_fault` compares that band's energy with
the same band of a baseline frame recorded on healthy equipment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from scripts.monitor.alerts import Alert, AlertKind, Severity, make_alert

__all__ = [
    'Spectrum',
    'fft_radix2',
    'dft',
    'fault_band',
    'band_energy',
    'band_energy_ratio',
    'spectral_fault',
    'DEFAULT_RATIO_THRESHOLD',
    'DEFAULT_BAND_HALF_WIDTH',
    'URGENT_FACTOR',
]

DEFAULT_RATIO_THRESHOLD = 4.0
DEFAULT_BAND_HALF_WIDTH = 10
URGENT_FACTOR = 4.0
_MIN_LENGTH = 8


def _bit_reverse_indices(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft_radix2(x: np.ndarray) -> np.ndarray:
    """Complex DFT of ``x``; the length must be a power of two >= 8."""
    data = np.asarray(x, dtype=np.complex128)
    if data.ndim != 1:
        raise ValueError(f"signal must be one-dimensional, got shape {data.shape}")
    n = data.size
    if n < _MIN_LENGTH or n & (n - 1):
        raise ValueError(f"signal length must be a power of two >= {_MIN_LENGTH}, got {n}")

    out = data[_bit_reverse_indices(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        groups = out.reshape(n // size, size)
        even = groups[:, :half].copy()
        odd = groups[:, half:] * twiddle
        groups[:, :half] = even + odd
        groups[:, half:] = even - odd
        out = groups.reshape(n)
        size *= 2
    return out


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Magnitudes of bins ``0 .. n/2`` of an ``n``-point transform."""

    magnitudes: np.ndarray
    sample_rate: float
    n: int

    def __post_init__(self) -> None:
        if self.magnitudes.shape != (self.n // 2 + 1,):
            raise ValueError(f"expected {self.n // 2 + 1} magnitudes, got {self.magnitudes.shape}")

    @property
    def resolution_hz(self) -> float:
        return self.sample_rate / self.n

    def bin_of(self, frequency_hz: float) -> int:
        return int(round(frequency_hz * self.n / self.sample_rate))


def dft(signal: np.ndarray, sample_rate: float) -> Spectrum:
    """One-sided magnitude spectrum of a real or complex frame."""
    if sample_rate <= 0:
        raise ValueError(f"sample_rate must be > 0, got {sample_rate}")
    coefficients = fft_radix2(signal)
    n = coefficients.size
    return Spectrum(magnitudes=np.abs(coefficients[: n // 2 + 1]), sample_rate=float(sample_rate), n=n)


def fault_band(spectrum: Spectrum, fault_hz: float, half_width: int = DEFAULT_BAND_HALF_WIDTH) -> range:
    """Bins within ``half_width`` of the fault frequency, clipped to the spectrum."""
    centre = spectrum.bin_of(fault_hz)
    return range(max(0, centre - half_width), min(spectrum.n // 2, centre + half_width) + 1)


def band_energy(spectrum: Spectrum, band: range) -> float:
    if band.start < 0 or band.stop > spectrum.n // 2 + 1 or len(band) == 0:
        raise ValueError(f"band {band} outside bins 0..{spectrum.n // 2}")
    values = spectrum.magnitudes[band.start:band.stop]
    return math.fsum(float(v) for v in values * values)


def band_energy_ratio(spectrum: Spectrum, baseline: Spectrum, band: range) -> float:
    """Band energy relative to the baseline.

    A silent baseline gives ``inf`` when the spectrum has band energy and 1
    when both are silent.
    """
    if spectrum.n != baseline.n or spectrum.sample_rate != baseline.sample_rate:
        raise ValueError(
            f"spectra do not match: n={spectrum.n}/{baseline.n}, "
            f"rate={spectrum.sample_rate}/{baseline.sample_rate}"
        )
    energy = band_energy(spectrum, band)
    reference = band_energy(baseline, band)
    if reference == 0.0:
        return math.inf if energy > 0.0 else 1.0
    return energy / reference


def spectral_fault(
    spectrum: Spectrum,
    baseline_spectrum: Spectrum,
    band: range,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
    *,
    asset_id: str = 'dispenser-1',
    timestamp: int = 0,
) -> Optional[Alert]:
    """Vibration fault alert when the band energy ratio exceeds ``ratio_threshold``.

    Ratios above ``URGENT_FACTOR`` times the threshold are urgent.
    """
    ratio = band_energy_ratio(spectrum, baseline_spectrum, band)
    if not ratio > ratio_threshold:
        return None
    severity = Severity.URGENT if ratio > URGENT_FACTOR * ratio_threshold else Severity.ADVISORY
    low = band.start * spectrum.resolution_hz
    high = (band.stop - 1) * spectrum.resolution_hz
    return make_alert(
        AlertKind.VIBRATION_FAULT,
        asset_id,
        severity,
        timestamp,
        f"band {low:.0f}-{high:.0f} Hz energy ratio {ratio:.2f}",
    )
