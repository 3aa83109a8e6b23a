"""Tests for market state discretization."""

from dataclasses import replace

import pytest

from scripts.pricing.state import (
    N_STATES,
    CompDelta,
    DemandBucket,
    PriceState,
    WeatherBucket,
    discretize_state,
)
from scripts.sim.exogenous import Daypart, ExogenousState
from scripts.sim.station import StationParams

PARAMS = StationParams()
NOON = ExogenousState(
    weather_index=0.3, traffic_index=0.5, competitor_price=3.0, wholesale_cost=2.75, hour_of_day=12, day_of_week=2
)


def _state(rate_factor: float = 1.0, delta_mills: int = 0, exo: ExogenousState = NOON) -> PriceState:
    rate = PARAMS.base_daypart_rate(exo.hour_of_day) * rate_factor
    return discretize_state(rate, exo.competitor_mills + delta_mills, exo, PARAMS)


def test_state_count():
    assert N_STATES == 72


def test_central_state():
    state = _state()
    assert state == PriceState(DemandBucket.MEDIUM, CompDelta.PAR, Daypart.MIDDAY, WeatherBucket.MILD)
    assert state.index == 36


@pytest.mark.parametrize(
    'delta, expected',
    [(-30, CompDelta.CHEAPER), (-21, CompDelta.CHEAPER), (-20, CompDelta.PAR), (20, CompDelta.PAR),
     (21, CompDelta.PRICIER)],
)
def test_competitor_band_is_inclusive(delta, expected):
    assert _state(delta_mills=delta).comp_delta_bucket is expected


@pytest.mark.parametrize(
    'factor, expected',
    [(0.5, DemandBucket.LOW), (0.7, DemandBucket.MEDIUM), (1.3, DemandBucket.MEDIUM), (1.5, DemandBucket.HIGH)],
)
def test_demand_buckets(factor, expected):
    assert _state(rate_factor=factor).demand_bucket is expected


def test_weather_threshold():
    assert _state(exo=replace(NOON, weather_index=0.5)).weather_bucket is WeatherBucket.ADVERSE
    assert _state(exo=replace(NOON, weather_index=0.49)).weather_bucket is WeatherBucket.MILD


def test_daypart_follows_the_clock():
    assert _state(exo=replace(NOON, hour_of_day=7)).daypart_bucket is Daypart.MORNING
    assert _state(exo=replace(NOON, hour_of_day=23)).daypart_bucket is Daypart.NIGHT


def test_zero_base_rate_is_medium():
    params = replace(PARAMS, base_arrival_rate=0.0)
    assert discretize_state(0.0, NOON.competitor_mills, NOON, params).demand_bucket is DemandBucket.MEDIUM


def test_index_is_a_bijection():
    indices = {PriceState.from_index(i).index for i in range(N_STATES)}
    assert indices == set(range(N_STATES))


@pytest.mark.parametrize('index', [-1, N_STATES])
def test_index_out_of_range(index):
    with pytest.raises(ValueError):
        PriceState.from_index(index)
