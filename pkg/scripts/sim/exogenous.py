"""Exogenous world factors: weather, traffic, competitor and wholesale prices.

Each simulated hour the world advances by one :func:`step_exogenous` call:

    - weather and traffic indices follow mean-reverting walks toward
      daypart-dependent means, clamped to [0, 1];
    - the wholesale cost follows a geometric walk (daily sd 0.5%);
    - the competitor posts wholesale plus a mean-reverting margin and never
      sells below cost;
    - a local event flag is drawn once per day at midnight.

Values are quantized as they are generated (indices to 1e-4, prices to
whole mills) so an event log written with scaled integers reproduces them
exactly on replay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import IntEnum

from scripts.sim.rng import Rng64, uniforms
from scripts.sim.station import MILLS_PER_DOLLAR, StationParams

__all__ = [
    'Daypart',
    'daypart_of',
    'ExogenousState',
    'initial_exogenous',
    'step_exogenous',
    'advance_clock',
    'quantize_index',
    'quantize_price',
]

_INDEX_SCALE = 10_000
_UNIFORMS_PER_STEP = 9


class Daypart(IntEnum):
    NIGHT = 0
    MORNING = 1
    MIDDAY = 2
    EVENING = 3


def daypart_of(hour_of_day: int) -> Daypart:
    """Night 22-5, morning 6-10, midday 11-16, evening 17-21."""
    if 6 <= hour_of_day <= 10:
        return Daypart.MORNING
    if 11 <= hour_of_day <= 16:
        return Daypart.MIDDAY
    if 17 <= hour_of_day <= 21:
        return Daypart.EVENING
    return Daypart.NIGHT


def quantize_index(value: float) -> float:
    return round(min(1.0, max(0.0, value)) * _INDEX_SCALE) / _INDEX_SCALE


def quantize_price(value: float) -> float:
    return round(value * MILLS_PER_DOLLAR) / MILLS_PER_DOLLAR


@dataclass(frozen=True)
class ExogenousState:
    """World factors X_t for one hour."""

    weather_index: float
    traffic_index: float
    competitor_price: float
    wholesale_cost: float
    hour_of_day: int
    day_of_week: int
    event_flag: bool = False

    def __post_init__(self) -> None:
        if not (0.0 <= self.weather_index <= 1.0 and 0.0 <= self.traffic_index <= 1.0):
            raise ValueError("weather_index and traffic_index must lie within [0, 1]")
        if self.wholesale_cost <= 0 or self.competitor_price < self.wholesale_cost:
            raise ValueError(
                f"competitor_price {self.competitor_price} must be >= wholesale_cost "
                f"{self.wholesale_cost} > 0"
            )
        if not (0 <= self.hour_of_day <= 23 and 0 <= self.day_of_week <= 6):
            raise ValueError(f"invalid clock {self.day_of_week}/{self.hour_of_day}")

    @property
    def daypart(self) -> Daypart:
        return daypart_of(self.hour_of_day)

    @property
    def competitor_mills(self) -> int:
        return int(round(self.competitor_price * MILLS_PER_DOLLAR))

    @property
    def wholesale_mills(self) -> int:
        return int(round(self.wholesale_cost * MILLS_PER_DOLLAR))


def initial_exogenous(params: StationParams) -> ExogenousState:
    """Hour 0, day 0 world at the daypart means and target competitor margin."""
    dyn = params.exogenous
    night = Daypart.NIGHT
    wholesale = quantize_price(dyn.initial_wholesale)
    return ExogenousState(
        weather_index=quantize_index(dyn.weather_means[night]),
        traffic_index=quantize_index(dyn.traffic_means[night]),
        competitor_price=max(wholesale, quantize_price(wholesale + dyn.margin_target)),
        wholesale_cost=wholesale,
        hour_of_day=0,
        day_of_week=0,
        event_flag=False,
    )


def advance_clock(exo: ExogenousState, hours: int = 1) -> ExogenousState:
    """Same factors, clock moved forward by ``hours``."""
    total = exo.hour_of_day + hours
    return replace(
        exo,
        hour_of_day=total % 24,
        day_of_week=(exo.day_of_week + total // 24) % 7,
    )


def step_exogenous(
    prev: ExogenousState, params: StationParams, rng: Rng64
) -> tuple[ExogenousState, Rng64]:
    """Advance the world by one hour.

    Consumes a fixed block of uniforms per call so the stream position
    depends only on the number of steps taken.
    """
    dyn = params.exogenous
    rng, u = uniforms(rng, _UNIFORMS_PER_STEP)
    z = [
        math.sqrt(-2.0 * math.log(1.0 - u[2 * i])) * math.cos(2.0 * math.pi * u[2 * i + 1])
        for i in range(4)
    ]

    moved = advance_clock(prev)
    part = moved.daypart

    weather = prev.weather_index + dyn.reversion * (dyn.weather_means[part] - prev.weather_index)
    weather += dyn.index_step_sd * z[0]
    traffic = prev.traffic_index + dyn.reversion * (dyn.traffic_means[part] - prev.traffic_index)
    traffic += dyn.index_step_sd * z[1]

    hourly_sd = dyn.wholesale_daily_sd / math.sqrt(24.0)
    wholesale = quantize_price(prev.wholesale_cost * math.exp(hourly_sd * z[2]))
    wholesale = max(wholesale, 1.0 / MILLS_PER_DOLLAR)

    margin = prev.competitor_price - prev.wholesale_cost
    margin += dyn.margin_reversion * (dyn.margin_target - margin) + dyn.margin_step_sd * z[3]
    competitor = max(wholesale, quantize_price(wholesale + margin))

    event = (u[8] < dyn.event_prob) if moved.hour_of_day == 0 else prev.event_flag

    return (
        ExogenousState(
            weather_index=quantize_index(weather),
            traffic_index=quantize_index(traffic),
            competitor_price=competitor,
            wholesale_cost=wholesale,
            hour_of_day=moved.hour_of_day,
            day_of_week=moved.day_of_week,
            event_flag=bool(event),
        ),
        rng,
    )
