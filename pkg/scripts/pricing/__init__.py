"""Dynamic fuel pricing.

    - state.py: 72-state market discretization
    - qlearning.py: Q-table, TD update, epsilon-greedy selection, reward
    - policies.py: baselines, the learning policy and the greedy policy
    - training.py: offline training loop over simulated episodes
    - tables.py: Q-table and training-curve CSV files
"""

from .qlearning import PriceAction, QLearnParams, QTable, RewardWeights, q_update, reward, select_action
from .state import N_STATES, PriceState, discretize_state

__all__ = [
    'N_STATES',
    'PriceAction',
    'PriceState',
    'QLearnParams',
    'QTable',
    'RewardWeights',
    'discretize_state',
    'q_update',
    'reward',
    'select_action',
]
