"""Pricing policies the episode runner can drive.

Every policy implements ``decide(market) -> price in mills`` and
``observe(record)``. Baselines ignore state; the learning policy explores
and updates its table online; the greedy policy exploits a frozen snapshot.
"""

from __future__ import annotations

from enum import Enum
from typing import Optional

from scripts.pricing.qlearning import (
    PriceAction,
    QLearnParams,
    QTable,
    greedy_action,
    q_update,
    reward,
    select_action,
)
from scripts.pricing.state import discretize_state
from scripts.sim.episode import HourRecord, MarketView
from scripts.sim.exogenous import ExogenousState
from scripts.sim.rng import Rng64
from scripts.sim.station import StationParams, to_mills
from scripts.utils import logging_system as log

__all__ = [
    'PolicyKind',
    'FixedMarginPolicy',
    'CompetitorMatchPolicy',
    'LearningPricingPolicy',
    'GreedyPricingPolicy',
    'apply_action',
    'baseline_policy',
    'hour_reward',
    'FIXED_MARGIN_MILLS',
]

logger = log.get_logger(__name__)

FIXED_MARGIN_MILLS = 250


class PolicyKind(str, Enum):
    GREEDY = 'greedy'
    FIXED_MARGIN = 'fixed_margin'
    COMPETITOR_MATCH = 'competitor_match'


def apply_action(
    previous_price_mills: int, action: PriceAction, exo: ExogenousState, params: StationParams
) -> int:
    """Move the price one cent and clamp it to [wholesale, competitor + premium]."""
    proposed = previous_price_mills + 10 * int(action)
    floor = exo.wholesale_mills
    ceiling = max(floor, exo.competitor_mills + to_mills(params.max_price_premium))
    price = min(max(proposed, floor), ceiling)
    if price != proposed:
        logger.debug(f"hour-of-day {exo.hour_of_day}: price {proposed} mills clamped to {price}")
    return price


def hour_reward(record: HourRecord, params: QLearnParams) -> float:
    """Reward of one simulated hour: margin in dollars, gallons and retention change."""
    return reward(
        record.revenue_cents / 100.0,
        record.gallons_sold,
        record.retention_delta,
        params.reward_weights,
        wholesale_cost=record.cost_cents / 100.0,
    )


class FixedMarginPolicy:
    """Wholesale cost plus a fixed margin."""

    def __init__(self, margin_mills: int = FIXED_MARGIN_MILLS) -> None:
        self.margin_mills = margin_mills

    def decide(self, market: MarketView) -> int:
        return market.exo.wholesale_mills + self.margin_mills

    def observe(self, record: HourRecord) -> None:
        pass


class CompetitorMatchPolicy:
    """Post the competitor's price."""

    def decide(self, market: MarketView) -> int:
        return market.exo.competitor_mills

    def observe(self, record: HourRecord) -> None:
        pass


class LearningPricingPolicy:
    """Epsilon-greedy Q-learning inside an episode.

    The reward of hour ``t`` is paired with the state seen at ``t + 1``,
    so the update for each hour happens on the next ``decide`` call. The
    last hour of an episode has no successor state and is not learned from.
    """

    def __init__(self, table: QTable, params: QLearnParams, epsilon: float, rng: Rng64) -> None:
        self.table = table
        self.params = params
        self.epsilon = epsilon
        self.rng = rng
        self.total_reward = 0.0
        self._last: Optional[tuple[int, int]] = None
        self._reward: Optional[float] = None

    def decide(self, market: MarketView) -> int:
        state = discretize_state(market.demand_rate, market.previous_price_mills, market.exo, market.params).index
        if self._last is not None and self._reward is not None:
            s, a = self._last
            self.table = q_update(self.table, s, a, self._reward, state, self.params)
        action, self.rng = select_action(self.table, state, self.epsilon, self.rng)
        self._last = (state, action.index)
        self._reward = None
        return apply_action(market.previous_price_mills, action, market.exo, market.params)

    def observe(self, record: HourRecord) -> None:
        self._reward = hour_reward(record, self.params)
        self.total_reward += self._reward


class GreedyPricingPolicy:
    """Exploit an immutable snapshot of a trained table."""

    def __init__(self, table: QTable) -> None:
        self._values = table.values.copy()
        self._values.setflags(write=False)

    def refresh(self, table: QTable) -> None:
        """Swap in a new snapshot (used by the daily governance tick)."""
        values = table.values.copy()
        values.setflags(write=False)
        self._values = values

    def decide(self, market: MarketView) -> int:
        state = discretize_state(market.demand_rate, market.previous_price_mills, market.exo, market.params).index
        action = PriceAction.from_index(greedy_action(self._values, state))
        return apply_action(market.previous_price_mills, action, market.exo, market.params)

    def observe(self, record: HourRecord) -> None:
        pass


def baseline_policy(kind: PolicyKind | str) -> FixedMarginPolicy | CompetitorMatchPolicy:
    kind = PolicyKind(kind)
    if kind is PolicyKind.FIXED_MARGIN:
        return FixedMarginPolicy()
    if kind is PolicyKind.COMPETITOR_MATCH:
        return CompetitorMatchPolicy()
    raise ValueError(f"{kind.value} is not a baseline policy")
