"""Walk-forward evaluation of the ARX model against a persistence baseline.

Origins are placed every ``step`` hours starting at ``n_lags + train_window``.
At origin ``t0`` the model is fit on the ``train_window`` targets before
``t0`` and scored on one-step predictions for ``[t0, t0 + step)``; the
persistence forecast ``y[t-1]`` is scored on the same hours.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
from tqdm import tqdm

from scripts.forecast.arx import (
    ForecastMetrics,
    build_features,
    fit_arx,
    mae,
    mse,
    predict_rows,
)
from scripts.sim.exogenous import ExogenousState
from scripts.utils import logging_system as log

__all__ = ['BacktestWindow', 'BacktestResult', 'rolling_backtest', 'persistence_metrics']

logger = log.get_logger(__name__)


@dataclass(frozen=True)
class BacktestWindow:
    origin: int
    arx: ForecastMetrics
    persistence: ForecastMetrics


@dataclass
class BacktestResult:
    """Per-window metrics plus the stitched one-step predictions."""

    windows: list[BacktestWindow] = field(default_factory=list)
    time_index: list[int] = field(default_factory=list)
    actual: list[float] = field(default_factory=list)
    arx_predicted: list[float] = field(default_factory=list)
    persistence_predicted: list[float] = field(default_factory=list)

    @property
    def mean_arx_mse(self) -> float:
        return float(np.mean([w.arx.mse for w in self.windows]))

    @property
    def mean_persistence_mse(self) -> float:
        return float(np.mean([w.persistence.mse for w in self.windows]))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                'origin': [w.origin for w in self.windows],
                'n_points': [w.arx.n_points for w in self.windows],
                'arx_mse': [w.arx.mse for w in self.windows],
                'arx_mae': [w.arx.mae for w in self.windows],
                'persistence_mse': [w.persistence.mse for w in self.windows],
                'persistence_mae': [w.persistence.mae for w in self.windows],
            }
        )

    def overlay_frame(self, last_hours: int | None = None) -> pd.DataFrame:
        """Actual against predicted demand, optionally only the last ``last_hours`` points."""
        frame = pd.DataFrame(
            {
                'time_index': self.time_index,
                'actual': self.actual,
                'arx': self.arx_predicted,
                'persistence': self.persistence_predicted,
            }
        )
        return frame if last_hours is None else frame.tail(last_hours).reset_index(drop=True)


def persistence_metrics(actual: Sequence[float], previous: Sequence[float]) -> ForecastMetrics:
    return ForecastMetrics(mse=mse(actual, previous), mae=mae(actual, previous), n_points=len(actual))


def rolling_backtest(
    history: Sequence[float],
    exo: Sequence[ExogenousState],
    n_lags: int = 24,
    ridge_lambda: float = 1e-3,
    train_window: int = 672,
    step: int = 24,
    *,
    show_progress: bool = False,
) -> BacktestResult:
    """Walk-forward backtest.

    Args:
        history: Hourly demand, one value per hour.
        exo: Exogenous state of each hour.
        n_lags: Autoregressive order.
        ridge_lambda: Ridge penalty.
        train_window: Training targets per fit (hours).
        step: Hours between origins and points scored per window.
        show_progress: Show a progress bar over windows.
    """
    y = np.asarray(history, dtype=np.float64)
    if train_window < 1 or step < 1:
        raise ValueError(f"train_window and step must be >= 1, got {train_window} and {step}")
    if y.size < train_window + n_lags + 1:
        raise ValueError(
            f"history of {y.size} points is too short for train_window {train_window} "
            f"and {n_lags} lags (need {train_window + n_lags + 1})"
        )
    features, targets = build_features(y, exo, n_lags)
    origins = range(n_lags + train_window, y.size, step)
    result = BacktestResult()
    for t0 in tqdm(origins, desc="Backtest windows", unit="window", disable=not show_progress):
        train = slice(t0 - train_window - n_lags, t0 - n_lags)
        stop = min(t0 + step, y.size)
        test = slice(t0 - n_lags, stop - n_lags)
        model = fit_arx(features[train], targets[train], ridge_lambda)
        predicted = predict_rows(model, features[test])
        actual = targets[test]
        previous = y[t0 - 1: stop - 1]
        result.windows.append(
            BacktestWindow(
                origin=t0,
                arx=ForecastMetrics(mse(actual, predicted), mae(actual, predicted), len(actual)),
                persistence=persistence_metrics(actual, previous),
            )
        )
        result.time_index.extend(range(t0, stop))
        result.actual.extend(float(v) for v in actual)
        result.arx_predicted.extend(float(v) for v in predicted)
        result.persistence_predicted.extend(float(v) for v in previous)
    logger.debug(
        f"backtest: {len(result.windows)} windows, ARX mse {result.mean_arx_mse:.4f}, "
        f"persistence mse {result.mean_persistence_mse:.4f}"
    )
    return result
