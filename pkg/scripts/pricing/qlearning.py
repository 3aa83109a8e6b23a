"""Tabular Q-learning core: table, parameters, reward, update and action selection.

The update is the temporal-difference relaxation toward the Bellman target::

    Q(s, a) <- Q(s, a) + alpha * (r + gamma * max_a' Q(s', a') - Q(s, a))

All functions are pure. :func:`q_update` returns a new table and
:func:`select_action` returns the advanced generator with the action.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

from scripts.pricing.state import N_STATES
from scripts.sim.rng import Rng64, next_uniform

__all__ = [
    'PriceAction',
    'N_ACTIONS',
    'QTable',
    'QLearnParams',
    'RewardWeights',
    'reward',
    'q_update',
    'greedy_action',
    'select_action',
    'epsilon_at',
]


class PriceAction(IntEnum):
    """Price move in cents."""

    DOWN = -1
    HOLD = 0
    UP = 1

    @property
    def index(self) -> int:
        return self.value + 1

    @classmethod
    def from_index(cls, index: int) -> PriceAction:
        return cls(index - 1)


N_ACTIONS = len(PriceAction)


@dataclass(frozen=True)
class RewardWeights:
    revenue: float = 1.0
    volume: float = 0.0
    retention: float = 5.0

    def __post_init__(self) -> None:
        if min(self.revenue, self.volume, self.retention) < 0:
            raise ValueError(f"reward weights must be >= 0, got {self}")


@dataclass(frozen=True)
class QLearnParams:
    """Learning settings.

    Attributes:
        alpha: Learning rate in (0, 1].
        gamma: Discount factor in [0, 1).
        epsilon_start: Exploration rate of the first episode.
        epsilon_end: Exploration rate once decay is complete.
        epsilon_decay_episodes: Episodes of linear decay.
        episodes: Training episodes.
        episode_days: Simulated days per training episode.
        reward_weights: Weights of margin, volume and retention.
    """

    alpha: float = 0.1
    gamma: float = 0.9
    epsilon_start: float = 0.3
    epsilon_end: float = 0.01
    epsilon_decay_episodes: int = 240
    episodes: int = 300
    episode_days: int = 30
    reward_weights: RewardWeights = field(default_factory=RewardWeights)

    def __post_init__(self) -> None:
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        for name in ('epsilon_start', 'epsilon_end'):
            if not 0 <= getattr(self, name) <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {getattr(self, name)}")
        if self.epsilon_end > self.epsilon_start:
            raise ValueError("epsilon_end must not exceed epsilon_start")
        if self.epsilon_decay_episodes < 0 or self.episodes < 0:
            raise ValueError("episode counts must be >= 0")
        if self.episode_days < 1:
            raise ValueError(f"episode_days must be >= 1, got {self.episode_days}")


@dataclass(frozen=True, eq=False)
class QTable:
    """Action values and visit counts, ``n_states x n_actions``."""

    values: np.ndarray
    visit_counts: np.ndarray

    def __post_init__(self) -> None:
        if self.values.ndim != 2 or self.values.shape != self.visit_counts.shape:
            raise ValueError(f"values {self.values.shape} and visits {self.visit_counts.shape} must match")

    @classmethod
    def zeros(cls, n_states: int = N_STATES, n_actions: int = N_ACTIONS) -> QTable:
        return cls(np.zeros((n_states, n_actions)), np.zeros((n_states, n_actions), dtype=np.int64))

    @property
    def n_states(self) -> int:
        return self.values.shape[0]

    @property
    def n_actions(self) -> int:
        return self.values.shape[1]

    def copy(self) -> QTable:
        return QTable(self.values.copy(), self.visit_counts.copy())

    def equals(self, other: QTable) -> bool:
        return bool(np.array_equal(self.values, other.values) and np.array_equal(self.visit_counts, other.visit_counts))


def reward(
    revenue: float,
    volume: float,
    retention_delta: float,
    weights: RewardWeights,
    *,
    wholesale_cost: float = 0.0,
) -> float:
    """Weighted margin, volume and retention.

    ``revenue`` is gross revenue and ``wholesale_cost`` the cost of the
    volume sold; with the default cost of 0, ``revenue`` is taken as margin.
    """
    margin = revenue - wholesale_cost
    return weights.revenue * margin + weights.volume * volume + weights.retention * retention_delta


def q_update(q: QTable, s: int, a: int, r: float, s_next: int, params: QLearnParams) -> QTable:
    """One TD(0) step on a copy of ``q``; ``a`` is an action index."""
    if not (0 <= s < q.n_states and 0 <= s_next < q.n_states):
        raise ValueError(f"state indices out of range: {s}, {s_next}")
    if not 0 <= a < q.n_actions:
        raise ValueError(f"action index out of range: {a}")
    values = q.values.copy()
    visits = q.visit_counts.copy()
    target = r + params.gamma * float(values[s_next].max())
    values[s, a] += params.alpha * (target - values[s, a])
    visits[s, a] += 1
    return QTable(values, visits)


def greedy_action(values: np.ndarray, s: int) -> int:
    """Index of the best action; ties go to the lowest index."""
    return int(np.argmax(values[s]))


def select_action(q: QTable, s: int, epsilon: float, rng: Rng64) -> tuple[PriceAction, Rng64]:
    """Epsilon-greedy action.

    One uniform decides whether to explore; exploring draws a second
    uniform for the action.
    """
    if not 0 <= epsilon <= 1:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    rng, u = next_uniform(rng)
    if u < epsilon:
        rng, v = next_uniform(rng)
        return PriceAction.from_index(min(int(v * q.n_actions), q.n_actions - 1)), rng
    return PriceAction.from_index(greedy_action(q.values, s)), rng


def epsilon_at(params: QLearnParams, episode: int) -> float:
    """Linear decay from ``epsilon_start`` to ``epsilon_end``."""
    if params.epsilon_decay_episodes == 0:
        return params.epsilon_end
    fraction = min(episode / params.epsilon_decay_episodes, 1.0)
    return params.epsilon_start + (params.epsilon_end - params.epsilon_start) * fraction
