"""Vehicle health rules for scanned customer cars: battery voltage and tire pressure."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from scripts.monitor.alerts import Alert, AlertKind, Severity, make_alert

__all__ = [
    'battery_anomaly',
    'battery_residual_scores',
    'tire_check',
    'MIN_BATTERY_SERIES',
    'BATTERY_Z_THRESHOLD',
    'TIRE_ADVISORY_BAND',
    'TIRE_URGENT_BELOW',
]

MIN_BATTERY_SERIES = 20
BATTERY_Z_THRESHOLD = 6.0
FIT_FRACTION = 0.8
MAD_TO_SD = 1.4826
_MIN_SCALE = 1e-6

TIRE_ADVISORY_BAND = (28.0, 36.0)
TIRE_URGENT_BELOW = 22.0


def battery_residual_scores(voltages: Sequence[float]) -> tuple[np.ndarray, int]:
    """Robust z-scores of AR(1) residuals and the index where scoring starts.

    The AR(1) model ``v[t] = a + phi * v[t-1]`` is fit by least squares on
    the first 80% of the series. Residuals are centred on the median of the
    fit-window residuals and scaled by their MAD (times 1.4826). Element
    ``i`` of the returned array scores ``voltages[i + 1]``.
    """
    series = np.asarray(voltages, dtype=np.float64)
    if series.ndim != 1 or series.size < MIN_BATTERY_SERIES:
        raise ValueError(f"battery series needs at least {MIN_BATTERY_SERIES} readings, got {series.size}")
    n_fit = int(FIT_FRACTION * series.size)
    prev, curr = series[:-1], series[1:]
    design = np.column_stack([np.ones(n_fit - 1), prev[: n_fit - 1]])
    coef, *_ = np.linalg.lstsq(design, curr[: n_fit - 1], rcond=None)
    residuals = curr - (coef[0] + coef[1] * prev)
    fit_residuals = residuals[: n_fit - 1]
    centre = float(np.median(fit_residuals))
    mad = float(np.median(np.abs(fit_residuals - centre)))
    scale = max(MAD_TO_SD * mad, _MIN_SCALE)
    return np.abs(residuals - centre) / scale, n_fit


def battery_anomaly(
    voltages: Sequence[float],
    *,
    asset_id: str = 'vehicle-0',
    timestamps: Optional[Sequence[int]] = None,
    z_threshold: float = BATTERY_Z_THRESHOLD,
) -> Optional[Alert]:
    """Alert on the first reading after the fit window whose robust z-score exceeds ``z_threshold``.

    The alert timestamp is ``timestamps[i]`` for the offending reading ``i``,
    or ``i`` itself when no timestamps are given.
    """
    if timestamps is not None and len(timestamps) != len(voltages):
        raise ValueError("timestamps and voltages differ in length")
    scores, n_fit = battery_residual_scores(voltages)
    # scores[i] belongs to reading i + 1
    tail = scores[n_fit - 1:]
    hits = np.flatnonzero(tail > z_threshold)
    if hits.size == 0:
        return None
    index = int(hits[0]) + n_fit
    timestamp = int(timestamps[index]) if timestamps is not None else index
    return make_alert(
        AlertKind.BATTERY,
        asset_id,
        Severity.ADVISORY,
        timestamp,
        f"voltage {float(voltages[index]):.2f} V, robust z {float(tail[hits[0]]):.1f}",
    )


def tire_check(pressure: float, *, asset_id: str = 'vehicle-0', timestamp: int = 0) -> Optional[Alert]:
    """Urgent below 22 psi, advisory outside 28-36 psi."""
    if pressure < 0:
        raise ValueError(f"tire pressure must be >= 0, got {pressure}")
    low, high = TIRE_ADVISORY_BAND
    if pressure < TIRE_URGENT_BELOW:
        severity = Severity.URGENT
    elif pressure < low or pressure > high:
        severity = Severity.ADVISORY
    else:
        return None
    return make_alert(AlertKind.TIRE, asset_id, severity, timestamp, f"tire pressure {pressure:.1f} psi")
