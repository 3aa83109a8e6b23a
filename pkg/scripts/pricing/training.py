"""Offline training of the Q-learning pricing policy against the simulator.

Episode ``e`` runs on its own seed derived from the scenario seed, so the
training run is deterministic and independent of how many numbers any one
episode draws. Exploration draws come from a single stream that carries
across episodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import pandas as pd
from tqdm import tqdm

from scripts.governance.inventory import ReplenishmentController
from scripts.pricing.policies import LearningPricingPolicy
from scripts.pricing.qlearning import QLearnParams, QTable, epsilon_at
from scripts.sim.episode import SimulationConfig, StationController, run_episode
from scripts.sim.rng import MASK64, Stream, substream
from scripts.utils import logging_system as log

__all__ = ['CurvePoint', 'TrainingResult', 'train_policy', 'episode_seed']

logger = log.get_logger(__name__)

_SEED_MASK = 0x7FFF_FFFF


@dataclass(frozen=True)
class CurvePoint:
    episode: int
    total_reward: float
    epsilon: float


@dataclass
class TrainingResult:
    table: QTable
    curve: list[CurvePoint] = field(default_factory=list)

    def curve_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                'episode': [p.episode for p in self.curve],
                'total_reward': [p.total_reward for p in self.curve],
                'epsilon': [p.epsilon for p in self.curve],
            }
        )


def episode_seed(seed: int, episode: int) -> int:
    """Simulation seed of training episode ``episode``."""
    return int(substream(seed & MASK64, Stream.TRAINING, episode).state & _SEED_MASK)


def train_policy(
    config: SimulationConfig,
    params: QLearnParams,
    *,
    controller_factory: Optional[Callable[[], StationController]] = None,
    show_progress: bool = False,
) -> TrainingResult:
    """Train a table over ``params.episodes`` simulated episodes.

    Args:
        config: Scenario simulation settings; its seed roots all episode seeds.
        params: Learning settings.
        controller_factory: Builds the station controller of each episode.
            Defaults to the replenishment-only controller.
        show_progress: Show a progress bar over episodes.

    Returns:
        Final table and the per-episode total reward curve.
    """
    factory = controller_factory or ReplenishmentController.default
    horizon = params.episode_days * 24
    table = QTable.zeros()
    rng = substream(config.seed & MASK64, Stream.EXPLORATION)
    result = TrainingResult(table=table)

    for episode in tqdm(range(params.episodes), desc="Training episodes", unit="ep", disable=not show_progress):
        epsilon = epsilon_at(params, episode)
        policy = LearningPricingPolicy(table, params, epsilon, rng)
        run_episode(
            replace(config, seed=episode_seed(config.seed, episode)),
            policy,
            factory(),
            horizon,
            detailed=False,
        )
        table, rng = policy.table, policy.rng
        result.curve.append(CurvePoint(episode, policy.total_reward, epsilon))
        if (episode + 1) % 50 == 0:
            logger.debug(f"episode {episode + 1}: reward {policy.total_reward:.1f}, epsilon {epsilon:.3f}")

    result.table = table
    logger.info(f"Trained pricing policy over {params.episodes} episodes of {params.episode_days} days")
    return result
