"""CSV exchange for Q-tables and training curves."""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from scripts.pricing.qlearning import N_ACTIONS, QTable
from scripts.pricing.training import TrainingResult
from scripts.utils import logging_system as log

__all__ = ['QTABLE_COLUMNS', 'CURVE_COLUMNS', 'write_qtable', 'read_qtable', 'write_curve']

logger = log.get_logger(__name__)

QTABLE_COLUMNS = ['state_index', 'q_down', 'q_hold', 'q_up', 'visits_down', 'visits_hold', 'visits_up']
CURVE_COLUMNS = ['episode', 'total_reward', 'epsilon']


def write_qtable(path: Union[str, Path], table: QTable) -> Path:
    if table.n_actions != N_ACTIONS:
        raise ValueError(f"only {N_ACTIONS}-action tables can be written, got {table.n_actions}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(
        {
            'state_index': np.arange(table.n_states),
            'q_down': table.values[:, 0],
            'q_hold': table.values[:, 1],
            'q_up': table.values[:, 2],
            'visits_down': table.visit_counts[:, 0],
            'visits_hold': table.visit_counts[:, 1],
            'visits_up': table.visit_counts[:, 2],
        },
        columns=QTABLE_COLUMNS,
    )
    frame.to_csv(path, index=False, float_format='%.17g')
    logger.debug(f"wrote Q-table with {table.n_states} states to {path}")
    return path


def read_qtable(path: Union[str, Path]) -> QTable:
    """Load a table written by :func:`write_qtable`.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ValueError: Unexpected columns or state indices out of order.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Q-table not found: {path}")
    frame = pd.read_csv(path, float_precision='round_trip')
    if list(frame.columns) != QTABLE_COLUMNS:
        raise ValueError(f"{path}: expected columns {QTABLE_COLUMNS}, got {list(frame.columns)}")
    if not np.array_equal(frame['state_index'].to_numpy(), np.arange(len(frame))):
        raise ValueError(f"{path}: state_index must run 0..{len(frame) - 1} in order")
    values = frame[['q_down', 'q_hold', 'q_up']].to_numpy(dtype=np.float64)
    visits = frame[['visits_down', 'visits_hold', 'visits_up']].to_numpy(dtype=np.int64)
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: Q-values must be finite")
    return QTable(values, visits)


def write_curve(path: Union[str, Path], result: TrainingResult) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    result.curve_frame().to_csv(path, index=False, float_format='%.6f')
    return path
