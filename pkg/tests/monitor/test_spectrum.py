"""Tests for the radix-2 FFT and the vibration band-energy rule."""

import math

import numpy as np
import pytest

from scripts.monitor.alerts import AlertKind, Severity
from scripts.monitor.spectrum import (
    Spectrum,
    band_energy,
    band_energy_ratio,
    dft,
    fault_band,
    fft_radix2,
    spectral_fault,
)


def _naive_dft(x: np.ndarray) -> np.ndarray:
    n = x.size
    k = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(k, k) / n) @ x


class TestFft:
    def test_cosine_lands_in_one_bin(self):
        n = 64
        x = np.cos(2 * np.pi * 5 * np.arange(n) / n)
        magnitudes = np.abs(fft_radix2(x))
        assert magnitudes[5] == pytest.approx(32.0, abs=1e-9)
        assert magnitudes[59] == pytest.approx(32.0, abs=1e-9)
        others = np.delete(magnitudes, [5, 59])
        assert np.all(others < 1e-9)

    @pytest.mark.parametrize('n', [8, 64, 1024])
    def test_matches_naive_transform(self, n):
        x = np.random.default_rng(n).normal(size=n) + 1j * np.random.default_rng(n + 1).normal(size=n)
        assert np.max(np.abs(fft_radix2(x) - _naive_dft(x))) < 1e-9 * max(1.0, n / 64)

    def test_matches_numpy(self):
        x = np.random.default_rng(1).normal(size=4096)
        np.testing.assert_allclose(fft_radix2(x), np.fft.fft(x), atol=1e-8)

    def test_parseval(self):
        x = np.random.default_rng(2).normal(size=512)
        coefficients = fft_radix2(x)
        assert np.sum(np.abs(x) ** 2) == pytest.approx(np.sum(np.abs(coefficients) ** 2) / x.size, rel=1e-12)

    @pytest.mark.parametrize('n', [0, 4, 12, 100])
    def test_bad_lengths_rejected(self, n):
        with pytest.raises(ValueError):
            fft_radix2(np.zeros(n))

    def test_two_dimensional_input_rejected(self):
        with pytest.raises(ValueError):
            fft_radix2(np.zeros((8, 8)))


class TestSpectrum:
    def test_dft_keeps_half_plus_one_bins(self):
        spectrum = dft(np.zeros(256), 1024.0)
        assert spectrum.magnitudes.shape == (129,)
        assert spectrum.resolution_hz == 4.0
        assert spectrum.bin_of(120.0) == 30

    def test_non_positive_rate_rejected(self):
        with pytest.raises(ValueError):
            dft(np.zeros(8), 0.0)

    def test_fault_band_is_clipped(self):
        spectrum = dft(np.zeros(64), 64.0)
        assert fault_band(spectrum, 30.0, half_width=5) == range(25, 33)
        assert fault_band(spectrum, 1.0, half_width=5) == range(0, 7)

    def test_band_energy_sums_squares(self):
        spectrum = Spectrum(magnitudes=np.array([1.0, 2.0, 3.0, 4.0, 5.0]), sample_rate=8.0, n=8)
        assert band_energy(spectrum, range(1, 4)) == 29.0
        with pytest.raises(ValueError):
            band_energy(spectrum, range(3, 7))


class TestSpectralFault:
    def _tone(self, amplitude: float, n: int = 1024, rate: float = 1024.0, hz: float = 120.0) -> Spectrum:
        t = np.arange(n) / rate
        noise = np.random.default_rng(0).normal(0.0, 0.1, n)
        return dft(amplitude * np.sin(2 * np.pi * hz * t) + noise, rate)

    def test_healthy_frame_raises_nothing(self):
        baseline = self._tone(1.0)
        assert spectral_fault(self._tone(1.0), baseline, fault_band(baseline, 120.0)) is None

    def test_strong_tone_is_urgent(self):
        baseline = self._tone(0.5)
        alert = spectral_fault(
            self._tone(5.0), baseline, fault_band(baseline, 120.0), asset_id='dispenser-3', timestamp=14
        )
        assert alert is not None
        assert alert.kind is AlertKind.VIBRATION_FAULT
        assert alert.severity is Severity.URGENT
        assert (alert.asset_id, alert.timestamp) == ('dispenser-3', 14)

    def test_moderate_tone_is_advisory(self):
        baseline = self._tone(1.0)
        alert = spectral_fault(self._tone(3.0), baseline, fault_band(baseline, 120.0))
        assert alert is not None
        assert alert.severity is Severity.ADVISORY

    def test_silent_baseline(self):
        silent = dft(np.zeros(64), 64.0)
        band = range(2, 5)
        assert band_energy_ratio(silent, silent, band) == 1.0
        assert band_energy_ratio(dft(np.ones(64), 64.0), silent, range(0, 3)) == math.inf

    def test_mismatched_spectra_rejected(self):
        with pytest.raises(ValueError):
            band_energy_ratio(dft(np.zeros(64), 64.0), dft(np.zeros(128), 64.0), range(0, 3))
