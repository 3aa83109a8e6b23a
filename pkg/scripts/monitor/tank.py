"""Tank mass balance and the CUSUM leak detector.

The gauge level should change by exactly what was delivered minus what the
dispensers metered. The residual of that balance is standardized by the
residual standard deviation of a leak-free warm-up period and fed to a
two-sided CUSUM. A leak shows up as a persistent negative residual, which
drives the lower statistic ``s_neg``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np

from scripts.monitor.alerts import Alert, AlertKind, Severity, make_alert
from scripts.sim.faults import TANK_ASSET
from scripts.sim.sensors import TankReading
from scripts.utils import logging_system as log

__all__ = [
    'mass_balance_residual',
    'CusumState',
    'cusum_update',
    'cusum_run',
    'LeakDetector',
    'leak_detector',
    'leak_step',
    'DEFAULT_SLACK',
    'DEFAULT_THRESHOLD',
    'DEFAULT_WARMUP_HOURS',
]

logger = log.get_logger(__name__)

DEFAULT_SLACK = 0.5
DEFAULT_THRESHOLD = 5.0
DEFAULT_WARMUP_HOURS = 48
_MIN_SIGMA_GALLONS = 0.5


def mass_balance_residual(reading: TankReading, prev_level: float) -> float:
    """Unexplained level change in gallons: negative means fuel went missing.

    ``prev_level`` is the previous gauge reading in gallons.
    """
    if prev_level < 0:
        raise ValueError(f"prev_level must be >= 0, got {prev_level}")
    change = reading.level - prev_level
    return change - (reading.deliveries - reading.metered_sales)


@dataclass(frozen=True)
class CusumState:
    """Two-sided CUSUM statistics.

    ``n`` counts the samples seen; ``alarm_index`` is the 0-based index of
    the sample that first pushed a statistic above ``h``.
    """

    k: float = DEFAULT_SLACK
    h: float = DEFAULT_THRESHOLD
    s_pos: float = 0.0
    s_neg: float = 0.0
    alarmed: bool = False
    alarm_index: Optional[int] = None
    n: int = 0

    def __post_init__(self) -> None:
        if self.k < 0 or self.h < 0:
            raise ValueError(f"CUSUM slack and threshold must be >= 0, got k={self.k}, h={self.h}")

    def reset(self) -> CusumState:
        return CusumState(k=self.k, h=self.h, n=self.n)


def cusum_update(state: CusumState, x: float) -> CusumState:
    """Feed one standardized sample."""
    s_pos = max(0.0, state.s_pos + x - state.k)
    s_neg = max(0.0, state.s_neg - x - state.k)
    alarmed = state.alarmed
    alarm_index = state.alarm_index
    if not alarmed and (s_pos > state.h or s_neg > state.h):
        alarmed = True
        alarm_index = state.n
    return replace(state, s_pos=s_pos, s_neg=s_neg, alarmed=alarmed, alarm_index=alarm_index, n=state.n + 1)


def cusum_run(samples: Iterable[float], k: float = DEFAULT_SLACK, h: float = DEFAULT_THRESHOLD) -> CusumState:
    state = CusumState(k=k, h=h)
    for x in samples:
        state = cusum_update(state, float(x))
    return state


@dataclass(frozen=True)
class LeakDetector:
    """Per-tank detector state: last gauge level, warm-up residuals, CUSUM.

    ``sigma`` is ``None`` until ``warmup_hours`` residuals have been seen.
    """

    cusum: CusumState = CusumState()
    warmup_hours: int = DEFAULT_WARMUP_HOURS
    prev_level: Optional[float] = None
    warmup: tuple[float, ...] = ()
    sigma: Optional[float] = None

    def rearm(self) -> LeakDetector:
        """Fresh statistics after a repair; the noise estimate is kept."""
        return replace(self, cusum=self.cusum.reset())


def leak_detector(
    k: float = DEFAULT_SLACK, h: float = DEFAULT_THRESHOLD, warmup_hours: int = DEFAULT_WARMUP_HOURS
) -> LeakDetector:
    if warmup_hours < 2:
        raise ValueError(f"warmup_hours must be >= 2, got {warmup_hours}")
    return LeakDetector(cusum=CusumState(k=k, h=h), warmup_hours=warmup_hours)


def leak_step(detector: LeakDetector, reading: TankReading) -> tuple[LeakDetector, Optional[Alert]]:
    """Advance the detector by one tank reading.

    Returns the new state and an urgent leak alert on the hour the CUSUM
    first alarms.
    """
    if detector.prev_level is None:
        return replace(detector, prev_level=reading.level), None
    residual = mass_balance_residual(reading, detector.prev_level)
    detector = replace(detector, prev_level=reading.level)

    if detector.sigma is None:
        warmup = detector.warmup + (residual,)
        if len(warmup) < detector.warmup_hours:
            return replace(detector, warmup=warmup), None
        sigma = max(float(np.std(warmup, ddof=1)), _MIN_SIGMA_GALLONS)
        logger.debug(f"leak detector armed at hour {reading.timestamp}: sigma={sigma:.3f} gal")
        return replace(detector, warmup=(), sigma=sigma), None

    before = detector.cusum.alarmed
    cusum = cusum_update(detector.cusum, residual / detector.sigma)
    detector = replace(detector, cusum=cusum)
    if cusum.alarmed and not before:
        detail = f"mass balance residual {residual:.1f} gal, s_neg {cusum.s_neg:.1f}"
        return detector, make_alert(AlertKind.LEAK, TANK_ASSET, Severity.URGENT, reading.timestamp, detail)
    return detector, None


