"""Tests for the demand model and the hourly arrival draw."""

import math
from dataclasses import replace

import pytest

from scripts.sim.customers import N_ITEMS, build_population
from scripts.sim.demand import StationState, VisitKind, demand_rate, revenue_cents, simulate_hour
from scripts.sim.exogenous import ExogenousState, initial_exogenous
from scripts.sim.rng import Rng64, Stream, substream
from scripts.sim.station import StationParams

NEUTRAL = StationParams(daypart_multipliers=(1.0,) * 24, weather_damping=0.0, traffic_gain=0.0)


def _exo(**overrides) -> ExogenousState:
    base = ExogenousState(
        weather_index=0.3, traffic_index=0.5, competitor_price=2.75, wholesale_cost=2.5,
        hour_of_day=12, day_of_week=1,
    )
    return replace(base, **overrides)


class TestDemandRate:
    def test_parity_price_gives_contextual_rate(self):
        params = StationParams()
        exo = _exo()
        expected = (
            params.base_arrival_rate
            * params.daypart_multipliers[12]
            * (1.0 - params.weather_damping * 0.3)
            * (1.0 + params.traffic_gain * 0.5)
        )
        assert demand_rate(2.75, exo, params) == pytest.approx(expected, rel=1e-12)

    def test_ten_cent_premium(self):
        rate = demand_rate(2.85, _exo(), NEUTRAL)
        assert rate == pytest.approx(NEUTRAL.base_arrival_rate * math.exp(-0.2), rel=1e-9)
        assert rate / NEUTRAL.base_arrival_rate == pytest.approx(0.8187, abs=1e-4)

    def test_zero_elasticity_ignores_price(self):
        params = replace(NEUTRAL, elasticity_beta=0.0)
        assert demand_rate(2.0, _exo(), params) == demand_rate(4.0, _exo(), params)

    def test_never_increases_with_price(self):
        rates = [demand_rate(p / 100.0, _exo(), StationParams()) for p in range(250, 330)]
        assert all(b <= a for a, b in zip(rates, rates[1:]))

    def test_event_boost(self):
        params = StationParams()
        assert demand_rate(2.75, _exo(event_flag=True), params) == pytest.approx(
            demand_rate(2.75, _exo(), params) * (1.0 + params.event_gain)
        )

    @pytest.mark.parametrize('price', [0.0, -1.0])
    def test_non_positive_price_rejected(self, price):
        with pytest.raises(ValueError):
            demand_rate(price, _exo(), StationParams())


def test_revenue_cents_rounds_half_up():
    assert revenue_cents(10_000, 3_000) == 3_000
    assert revenue_cents(1, 5_000) == 1
    assert revenue_cents(0, 3_000) == 0


class TestSimulateHour:
    def _state(self, level: int = 8_000_000) -> StationState:
        return StationState(hour=0, exo=initial_exogenous(StationParams()), tank_level_mgal=level)

    def test_zero_rate_gives_empty_hour(self):
        params = replace(StationParams(), base_arrival_rate=0.0)
        outcome, visits, _ = simulate_hour(self._state(), 3.0, params, Rng64(1))
        assert visits == ()
        assert outcome.visits == 0
        assert outcome.revenue_cents == 0
        assert outcome.gallons_sold_mgal == 0

    def test_empty_tank_turns_every_fuel_customer_away(self):
        params = replace(StationParams(), base_arrival_rate=200.0, shop_only_prob=0.0)
        outcome, visits, _ = simulate_hour(self._state(level=0), 3.0, params, Rng64(2))
        assert visits
        assert all(v.kind is VisitKind.TURNED_AWAY and v.gallons_mgal == 0 for v in visits)
        assert outcome.turned_away == outcome.visits == len(visits)
        assert outcome.gallons_sold_mgal == 0

    def test_visits_account_for_the_hour(self):
        params = replace(StationParams(), base_arrival_rate=300.0)
        population = build_population(5, params.n_repeat_users)
        outcome, visits, _ = simulate_hour(
            self._state(), 3.0, params, substream(5, Stream.DEMAND, 0), population=population
        )
        assert outcome.gallons_sold_mgal == sum(v.gallons_mgal for v in visits)
        assert outcome.visits == len(visits)
        assert outcome.turned_away == sum(v.kind is VisitKind.TURNED_AWAY for v in visits)
        assert all(0 <= item < N_ITEMS for v in visits for item in v.basket)
        assert [v.offset_s for v in visits] == sorted(v.offset_s for v in visits)
        assert all(v.dispenser == 0 for v in visits if v.kind is VisitKind.SHOP)
        assert all(1 <= v.dispenser <= params.n_dispensers for v in visits if v.kind is VisitKind.FUEL)

    def test_detailed_flag_does_not_change_aggregates(self):
        params = replace(StationParams(), base_arrival_rate=120.0)
        rng = substream(9, Stream.DEMAND, 4)
        detailed, _, _ = simulate_hour(self._state(), 3.0, params, rng)
        summary, visits, _ = simulate_hour(self._state(), 3.0, params, rng, detailed=False)
        assert detailed == summary
        assert visits == ()

    def test_fill_is_floored_at_one_mgal(self):
        params = replace(
            StationParams(), base_arrival_rate=300.0, gallons_mean=0.001, gallons_sd=5.0, shop_only_prob=0.0
        )
        outcome, visits, _ = simulate_hour(self._state(), 3.0, params, Rng64(8))
        assert visits
        assert outcome.turned_away == 0
        assert all(v.kind is VisitKind.FUEL and v.gallons_mgal >= 1 for v in visits)
        assert any(v.gallons_mgal == 1 for v in visits)

    def test_partial_fill_when_tank_runs_dry(self):
        params = replace(StationParams(), base_arrival_rate=200.0, shop_only_prob=0.0)
        outcome, visits, _ = simulate_hour(self._state(level=25_000), 3.0, params, Rng64(6))
        assert outcome.gallons_sold_mgal == 25_000
        assert outcome.turned_away > 0
