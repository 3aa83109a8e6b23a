"""CSV series exchange and demand extraction from episode logs.

Series files have a header row and two columns, ``time_index`` and
``value``, one row per hour in increasing time order.
"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING, Sequence, Union

import numpy as np
import pandas as pd

from scripts.sim.exogenous import ExogenousState
from scripts.utils import logging_system as log

if TYPE_CHECKING:
    from scripts.sim.episode import EpisodeLog

__all__ = ['SERIES_COLUMNS', 'write_series', 'read_series', 'episode_demand']

logger = log.get_logger(__name__)

SERIES_COLUMNS = ['time_index', 'value']


def write_series(path: Union[str, Path], values: Sequence[float], start: int = 0) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame({'time_index': np.arange(start, start + len(values)), 'value': np.asarray(values)})
    frame.to_csv(path, index=False, float_format='%.6f')
    logger.debug(f"wrote {len(frame)} points to {path}")
    return path


def read_series(path: Union[str, Path]) -> np.ndarray:
    """Values of a series file.

    Raises:
        FileNotFoundError: ``path`` does not exist.
        ValueError: Wrong header, non-numeric values or unordered time index.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"series file not found: {path}")
    frame = pd.read_csv(path)
    if list(frame.columns) != SERIES_COLUMNS:
        raise ValueError(f"{path}: expected columns {SERIES_COLUMNS}, got {list(frame.columns)}")
    if not pd.api.types.is_numeric_dtype(frame['value']):
        raise ValueError(f"{path}: non-numeric values")
    if not frame['time_index'].is_monotonic_increasing:
        raise ValueError(f"{path}: time_index is not increasing")
    return frame['value'].to_numpy(dtype=np.float64)


def episode_demand(log_: 'EpisodeLog') -> tuple[np.ndarray, list[ExogenousState]]:
    """Hourly gallons sold and the matching exogenous states."""
    records = log_.hourly_records
    demand = np.array([r.gallons_sold_mgal for r in records], dtype=np.float64) / 1000.0
    return demand, [r.exo for r in records]
