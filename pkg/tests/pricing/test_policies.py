"""Tests for the pricing policies."""

from dataclasses import replace

import numpy as np
import pytest

from scripts.pricing.policies import (
    CompetitorMatchPolicy,
    FixedMarginPolicy,
    GreedyPricingPolicy,
    LearningPricingPolicy,
    PolicyKind,
    apply_action,
    baseline_policy,
    hour_reward,
)
from scripts.pricing.qlearning import PriceAction, QLearnParams, QTable, RewardWeights
from scripts.pricing.state import discretize_state
from scripts.sim.episode import HourRecord, MarketView
from scripts.sim.exogenous import ExogenousState
from scripts.sim.rng import Rng64
from scripts.sim.station import StationParams

PARAMS = StationParams()
EXO = ExogenousState(
    weather_index=0.3, traffic_index=0.5, competitor_price=3.0, wholesale_cost=2.75, hour_of_day=12, day_of_week=2
)


def _market(previous_mills: int = 3000, exo: ExogenousState = EXO, hour: int = 12) -> MarketView:
    return MarketView(
        hour=hour,
        exo=exo,
        previous_price_mills=previous_mills,
        demand_rate=PARAMS.base_daypart_rate(exo.hour_of_day),
        params=PARAMS,
    )


def _record(revenue_cents: int = 3000, cost_cents: int = 2500, gallons_mgal: int = 1_000_000) -> HourRecord:
    return HourRecord(
        hour=12,
        exo=EXO,
        posted_price_mills=3000,
        gallons_sold_mgal=gallons_mgal,
        revenue_cents=revenue_cents,
        cost_cents=cost_cents,
        visits=10,
        turned_away=0,
        tank_level_mgal=5_000_000,
        retention_delta_ppm=-200_000,
    )


class TestApplyAction:
    def test_one_cent_moves(self):
        assert apply_action(3000, PriceAction.UP, EXO, PARAMS) == 3010
        assert apply_action(3000, PriceAction.DOWN, EXO, PARAMS) == 2990
        assert apply_action(3000, PriceAction.HOLD, EXO, PARAMS) == 3000

    def test_floor_is_wholesale(self):
        assert apply_action(2750, PriceAction.DOWN, EXO, PARAMS) == 2750
        assert apply_action(2000, PriceAction.HOLD, EXO, PARAMS) == 2750

    def test_ceiling_is_competitor_plus_premium(self):
        assert apply_action(3300, PriceAction.UP, EXO, PARAMS) == 3300
        assert apply_action(3500, PriceAction.DOWN, EXO, PARAMS) == 3300


class TestBaselines:
    def test_fixed_margin(self):
        exo = replace(EXO, wholesale_cost=2.75, competitor_price=3.1)
        assert FixedMarginPolicy().decide(_market(exo=exo)) == 3000
        assert FixedMarginPolicy(margin_mills=100).decide(_market(exo=exo)) == 2850

    def test_competitor_match(self):
        assert CompetitorMatchPolicy().decide(_market()) == 3000

    def test_baseline_lookup(self):
        assert isinstance(baseline_policy('fixed_margin'), FixedMarginPolicy)
        assert isinstance(baseline_policy(PolicyKind.COMPETITOR_MATCH), CompetitorMatchPolicy)
        with pytest.raises(ValueError):
            baseline_policy(PolicyKind.GREEDY)
        with pytest.raises(ValueError):
            baseline_policy('surge')


def test_hour_reward_uses_margin_dollars():
    params = QLearnParams(reward_weights=RewardWeights(revenue=1.0, volume=0.1, retention=5.0))
    assert hour_reward(_record(), params) == pytest.approx(5.0 + 0.1 * 1000.0 - 1.0)


class TestLearningPolicy:
    def test_reward_is_learned_on_the_next_decision(self):
        params = QLearnParams(alpha=1.0, gamma=0.0, reward_weights=RewardWeights(1.0, 0.0, 0.0))
        policy = LearningPricingPolicy(QTable.zeros(), params, epsilon=0.0, rng=Rng64(3))
        state = discretize_state(PARAMS.base_daypart_rate(12), 3000, EXO, PARAMS).index

        price = policy.decide(_market())
        assert price == 2990
        policy.observe(_record())
        assert policy.table.values.sum() == 0.0
        assert policy.total_reward == pytest.approx(5.0)

        policy.decide(_market(previous_mills=price, hour=13))
        assert policy.table.values[state, PriceAction.DOWN.index] == pytest.approx(5.0)
        assert policy.table.visit_counts.sum() == 1

    def test_first_decision_has_nothing_to_learn(self):
        policy = LearningPricingPolicy(QTable.zeros(), QLearnParams(), epsilon=0.0, rng=Rng64(3))
        policy.decide(_market())
        policy.decide(_market())
        assert policy.table.visit_counts.sum() == 0


class TestGreedyPolicy:
    def _table(self, best: PriceAction) -> QTable:
        table = QTable.zeros()
        table.values[:, best.index] = 1.0
        return table

    def test_follows_the_table(self):
        assert GreedyPricingPolicy(self._table(PriceAction.UP)).decide(_market()) == 3010

    def test_snapshot_is_isolated_from_the_source(self):
        table = self._table(PriceAction.UP)
        policy = GreedyPricingPolicy(table)
        table.values[:, :] = 0.0
        table.values[:, PriceAction.DOWN.index] = 5.0
        assert policy.decide(_market()) == 3010

    def test_refresh_swaps_the_snapshot(self):
        policy = GreedyPricingPolicy(self._table(PriceAction.UP))
        policy.refresh(self._table(PriceAction.HOLD))
        assert policy.decide(_market()) == 3000

    def test_snapshot_is_read_only(self):
        policy = GreedyPricingPolicy(QTable.zeros())
        with pytest.raises(ValueError):
            policy._values[0, 0] = 1.0
        assert not np.any(policy._values)
