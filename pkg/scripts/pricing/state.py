"""Discrete market state seen by the pricing agent.

Four factors, 72 states in total::

    index = ((demand * 3 + competitor_delta) * 4 + daypart) * 2 + weather

Traffic is left out; it moves with the daypart.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

from scripts.sim.exogenous import Daypart, ExogenousState
from scripts.sim.station import StationParams

__all__ = [
    'DemandBucket',
    'CompDelta',
    'WeatherBucket',
    'PriceState',
    'N_STATES',
    'discretize_state',
    'LOW_DEMAND_RATIO',
    'HIGH_DEMAND_RATIO',
    'PAR_BAND_MILLS',
    'ADVERSE_WEATHER',
]

LOW_DEMAND_RATIO = 0.67
HIGH_DEMAND_RATIO = 1.33
PAR_BAND_MILLS = 20
ADVERSE_WEATHER = 0.5


class DemandBucket(IntEnum):
    LOW = 0
    MEDIUM = 1
    HIGH = 2


class CompDelta(IntEnum):
    """Own posted price relative to the competitor."""

    CHEAPER = 0
    PAR = 1
    PRICIER = 2


class WeatherBucket(IntEnum):
    MILD = 0
    ADVERSE = 1


N_STATES = len(DemandBucket) * len(CompDelta) * len(Daypart) * len(WeatherBucket)


@dataclass(frozen=True)
class PriceState:
    demand_bucket: DemandBucket
    comp_delta_bucket: CompDelta
    daypart_bucket: Daypart
    weather_bucket: WeatherBucket

    @property
    def index(self) -> int:
        index = self.demand_bucket * len(CompDelta) + self.comp_delta_bucket
        index = index * len(Daypart) + self.daypart_bucket
        return int(index * len(WeatherBucket) + self.weather_bucket)

    @classmethod
    def from_index(cls, index: int) -> PriceState:
        if not 0 <= index < N_STATES:
            raise ValueError(f"state index must lie in [0, {N_STATES}), got {index}")
        index, weather = divmod(index, len(WeatherBucket))
        index, daypart = divmod(index, len(Daypart))
        demand, comp = divmod(index, len(CompDelta))
        return cls(DemandBucket(demand), CompDelta(comp), Daypart(daypart), WeatherBucket(weather))


def discretize_state(
    demand_rate: float, posted_price_mills: int, exo: ExogenousState, params: StationParams
) -> PriceState:
    """Bucket the market.

    Demand is compared with the base rate of the hour's daypart multiplier
    (below 0.67x is low, above 1.33x high). The competitor delta uses a
    ±$0.02 par band, inclusive. Weather at or above 0.5 is adverse.
    """
    base = params.base_daypart_rate(exo.hour_of_day)
    ratio = demand_rate / base if base > 0 else 1.0
    if ratio < LOW_DEMAND_RATIO:
        demand = DemandBucket.LOW
    elif ratio > HIGH_DEMAND_RATIO:
        demand = DemandBucket.HIGH
    else:
        demand = DemandBucket.MEDIUM

    delta = posted_price_mills - exo.competitor_mills
    if delta < -PAR_BAND_MILLS:
        comp = CompDelta.CHEAPER
    elif delta > PAR_BAND_MILLS:
        comp = CompDelta.PRICIER
    else:
        comp = CompDelta.PAR

    weather = WeatherBucket.ADVERSE if exo.weather_index >= ADVERSE_WEATHER else WeatherBucket.MILD
    return PriceState(demand, comp, exo.daypart, weather)
