"""Demand forecasting: ARX model, metrics, walk-forward backtest and CSV series I/O."""

from .arx import (
    ForecastMetrics,
    ForecastModel,
    RankDeficiencyError,
    build_features,
    evaluate,
    fit_arx,
    mse,
    predict_horizon,
    predict_next,
)
from .backtest import BacktestResult, rolling_backtest

__all__ = [
    'BacktestResult',
    'ForecastMetrics',
    'ForecastModel',
    'RankDeficiencyError',
    'build_features',
    'evaluate',
    'fit_arx',
    'mse',
    'predict_horizon',
    'predict_next',
    'rolling_backtest',
]
