"""CSV exchange for latent factors, the prediction heatmap and run metrics."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from scripts.recommender.factorization import LatentFactors, predict_matrix
from scripts.sim.customers import CATALOG, N_ITEMS

__all__ = ['write_factors', 'read_factors', 'heatmap_frame', 'write_heatmap']

_MATRICES = ('U', 'V')


def _factor_columns(k: int) -> list[str]:
    return ['matrix', 'row'] + [f"f{d}" for d in range(k)]


def write_factors(path: Union[str, Path], factors: LatentFactors) -> Path:
    """One row per factor vector: matrix name, row index, k values."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frames = []
    for name, matrix in zip(_MATRICES, (factors.U, factors.V)):
        frame = pd.DataFrame(matrix, columns=[f"f{d}" for d in range(factors.k)])
        frame.insert(0, 'row', np.arange(matrix.shape[0]))
        frame.insert(0, 'matrix', name)
        frames.append(frame)
    pd.concat(frames, ignore_index=True).to_csv(path, index=False, float_format='%.17g')
    return path


def read_factors(path: Union[str, Path], reg_lambda: float = 0.0) -> LatentFactors:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"factor file not found: {path}")
    frame = pd.read_csv(path, float_precision='round_trip')
    k = len(frame.columns) - 2
    if k < 1 or list(frame.columns) != _factor_columns(k):
        raise ValueError(f"{path}: unexpected columns {list(frame.columns)}")
    parts = []
    for name in _MATRICES:
        block = frame[frame['matrix'] == name].sort_values('row')
        if not np.array_equal(block['row'].to_numpy(), np.arange(len(block))):
            raise ValueError(f"{path}: rows of {name} are not 0..{len(block) - 1}")
        parts.append(block.iloc[:, 2:].to_numpy(dtype=np.float64))
    return LatentFactors(parts[0], parts[1], reg_lambda)


def heatmap_frame(factors: LatentFactors, users: Optional[Sequence[int]] = None) -> pd.DataFrame:
    """User x item predicted-rating grid, item columns named after the catalog."""
    grid = predict_matrix(factors)
    rows = np.arange(factors.n_users) if users is None else np.asarray(users, dtype=np.int64)
    if factors.n_items == N_ITEMS:
        columns = [item.name for item in CATALOG]
    else:
        columns = [f"item_{j}" for j in range(factors.n_items)]
    frame = pd.DataFrame(grid[rows], columns=columns)
    frame.insert(0, 'user', rows)
    return frame


def write_heatmap(
    path: Union[str, Path], factors: LatentFactors, users: Optional[Sequence[int]] = None
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    heatmap_frame(factors, users).to_csv(path, index=False, float_format='%.6f')
    return path
