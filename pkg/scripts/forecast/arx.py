"""Ridge-regularized autoregressive demand model with exogenous inputs (ARX).

A design row for target hour ``t`` is::

    [y[t-1], ..., y[t-n], x_t (33 columns), 1]

where ``x_t`` encodes the exogenous state of hour ``t``:

    ======= ===============================================
    columns content
    ======= ===============================================
    0-2     weather index, traffic index, competitor price
    3-25    hour-of-day indicators for hours 1..23
    26-31   day-of-week indicators for days 1..6
    32      local event flag
    ======= ===============================================

Hour 0 and day 0 are the reference levels of their one-hot groups, which
keeps the design matrix full rank alongside the intercept column.

Coefficients minimize the penalized squared error

    ||y - A w||^2 + lambda * ||w without intercept||^2

by a Cholesky solve of the normal equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from scripts.sim.exogenous import ExogenousState, advance_clock
from scripts.utils import logging_system as log

__all__ = [
    'N_EXO_FEATURES',
    'RankDeficiencyError',
    'ForecastModel',
    'ForecastMetrics',
    'encode_exogenous',
    'exogenous_matrix',
    'build_features',
    'fit_arx',
    'predict_next',
    'predict_horizon',
    'predict_rows',
    'penalized_loss',
    'mse',
    'mae',
    'evaluate',
]

logger = log.get_logger(__name__)

N_EXO_FEATURES = 33
_HOUR_OFFSET = 3
_DOW_OFFSET = _HOUR_OFFSET + 23
_EVENT_COLUMN = _DOW_OFFSET + 6


class RankDeficiencyError(ValueError):
    """Unpenalized least squares on a rank-deficient design matrix."""

    def __init__(self, rank: int, n_columns: int) -> None:
        self.rank = rank
        self.n_columns = n_columns
        super().__init__(
            f"design matrix has rank {rank} < {n_columns} columns; use ridge_lambda > 0"
        )


@dataclass(frozen=True, eq=False)
class ForecastModel:
    """Fitted ARX coefficients."""

    n_lags: int
    lag_coeffs: np.ndarray
    exo_coeffs: np.ndarray
    intercept: float
    ridge_lambda: float = 0.0

    def __post_init__(self) -> None:
        if self.n_lags < 1:
            raise ValueError(f"n_lags must be >= 1, got {self.n_lags}")
        if self.lag_coeffs.shape != (self.n_lags,) or self.exo_coeffs.shape != (N_EXO_FEATURES,):
            raise ValueError(
                f"expected {self.n_lags} lag and {N_EXO_FEATURES} exogenous coefficients, "
                f"got {self.lag_coeffs.shape} and {self.exo_coeffs.shape}"
            )
        if not (np.all(np.isfinite(self.coefficients))):
            raise ValueError("forecast model coefficients must be finite")
        if self.ridge_lambda < 0:
            raise ValueError(f"ridge_lambda must be >= 0, got {self.ridge_lambda}")

    @property
    def coefficients(self) -> np.ndarray:
        """Full weight vector in design-column order."""
        return np.concatenate([self.lag_coeffs, self.exo_coeffs, [self.intercept]])

    @property
    def n_columns(self) -> int:
        return self.n_lags + N_EXO_FEATURES + 1

    @classmethod
    def from_coefficients(cls, weights: np.ndarray, n_lags: int, ridge_lambda: float = 0.0) -> ForecastModel:
        weights = np.asarray(weights, dtype=np.float64)
        return cls(
            n_lags=n_lags,
            lag_coeffs=weights[:n_lags].copy(),
            exo_coeffs=weights[n_lags:n_lags + N_EXO_FEATURES].copy(),
            intercept=float(weights[-1]),
            ridge_lambda=ridge_lambda,
        )


@dataclass(frozen=True)
class ForecastMetrics:
    mse: float
    mae: float
    n_points: int


def encode_exogenous(exo: ExogenousState) -> np.ndarray:
    row = np.zeros(N_EXO_FEATURES)
    row[0] = exo.weather_index
    row[1] = exo.traffic_index
    row[2] = exo.competitor_price
    if exo.hour_of_day > 0:
        row[_HOUR_OFFSET + exo.hour_of_day - 1] = 1.0
    if exo.day_of_week > 0:
        row[_DOW_OFFSET + exo.day_of_week - 1] = 1.0
    row[_EVENT_COLUMN] = 1.0 if exo.event_flag else 0.0
    return row


def exogenous_matrix(exo: Sequence[ExogenousState]) -> np.ndarray:
    """Encoded exogenous rows, one per state."""
    n = len(exo)
    out = np.zeros((n, N_EXO_FEATURES))
    if n == 0:
        return out
    out[:, 0] = [e.weather_index for e in exo]
    out[:, 1] = [e.traffic_index for e in exo]
    out[:, 2] = [e.competitor_price for e in exo]
    hours = np.array([e.hour_of_day for e in exo])
    days = np.array([e.day_of_week for e in exo])
    rows = np.arange(n)
    out[rows[hours > 0], _HOUR_OFFSET + hours[hours > 0] - 1] = 1.0
    out[rows[days > 0], _DOW_OFFSET + days[days > 0] - 1] = 1.0
    out[:, _EVENT_COLUMN] = [1.0 if e.event_flag else 0.0 for e in exo]
    return out


def build_features(
    history: Sequence[float], exo: Sequence[ExogenousState], n_lags: int
) -> tuple[np.ndarray, np.ndarray]:
    """Design matrix and targets for every hour with a full lag window.

    ``exo[t]`` is the exogenous state of hour ``t``; row ``r`` of the result
    predicts ``history[r + n_lags]``.
    """
    if n_lags < 1:
        raise ValueError(f"n_lags must be >= 1, got {n_lags}")
    y = np.asarray(history, dtype=np.float64)
    if y.size <= n_lags:
        raise ValueError(f"history needs at least {n_lags + 1} points for {n_lags} lags, got {y.size}")
    if len(exo) != y.size:
        raise ValueError(f"history has {y.size} points but exogenous series has {len(exo)}")
    n_rows = y.size - n_lags
    lags = np.column_stack([y[n_lags - j - 1: y.size - j - 1] for j in range(n_lags)])
    features = np.hstack([lags, exogenous_matrix(exo[n_lags:]), np.ones((n_rows, 1))])
    return features, y[n_lags:].copy()


def _penalty(n_columns: int, ridge_lambda: float) -> np.ndarray:
    penalty = np.full(n_columns, ridge_lambda)
    penalty[-1] = 0.0
    return penalty


def fit_arx(features: np.ndarray, targets: np.ndarray, ridge_lambda: float = 1e-3) -> ForecastModel:
    """Ridge least squares; the intercept (last column) is not penalized.

    Raises:
        RankDeficiencyError: ``ridge_lambda`` is 0 and ``features`` lacks full column rank.
    """
    a = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if ridge_lambda < 0:
        raise ValueError(f"ridge_lambda must be >= 0, got {ridge_lambda}")
    if a.ndim != 2 or a.shape[0] != y.size or a.shape[0] == 0:
        raise ValueError(f"features {a.shape} do not match {y.size} targets")
    n_columns = a.shape[1]
    n_lags = n_columns - N_EXO_FEATURES - 1
    if n_lags < 1:
        raise ValueError(f"expected at least {N_EXO_FEATURES + 2} columns, got {n_columns}")
    if ridge_lambda == 0:
        rank = int(np.linalg.matrix_rank(a))
        if rank < n_columns:
            raise RankDeficiencyError(rank, n_columns)
    gram = a.T @ a + np.diag(_penalty(n_columns, ridge_lambda))
    try:
        weights = scipy.linalg.solve(gram, a.T @ y, assume_a='pos')
    except np.linalg.LinAlgError as exc:
        raise RankDeficiencyError(int(np.linalg.matrix_rank(a)), n_columns) from exc
    logger.debug(f"fit_arx: {a.shape[0]} rows x {n_columns} columns, lambda={ridge_lambda}")
    return ForecastModel.from_coefficients(weights, n_lags, ridge_lambda)


def predict_rows(model: ForecastModel, features: np.ndarray) -> np.ndarray:
    """Clamped predictions for prepared design rows."""
    return np.maximum(np.asarray(features) @ model.coefficients, 0.0)


def predict_next(model: ForecastModel, recent_history: Sequence[float], next_exo: ExogenousState) -> float:
    """One-step forecast from the last ``n_lags`` observations, clamped at 0."""
    y = np.asarray(recent_history, dtype=np.float64)
    if y.size < model.n_lags:
        raise ValueError(f"need {model.n_lags} recent observations, got {y.size}")
    lags = y[::-1][: model.n_lags]
    raw = float(lags @ model.lag_coeffs + encode_exogenous(next_exo) @ model.exo_coeffs + model.intercept)
    return max(raw, 0.0)


def predict_horizon(
    model: ForecastModel, recent_history: Sequence[float], next_exo: ExogenousState, steps: int
) -> np.ndarray:
    """Recursive multi-step forecast.

    Later hours reuse ``next_exo`` with the clock advanced; each prediction
    feeds the lag window of the next.
    """
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    window = list(np.asarray(recent_history, dtype=np.float64)[-model.n_lags:])
    if len(window) < model.n_lags:
        raise ValueError(f"need {model.n_lags} recent observations, got {len(window)}")
    out = np.zeros(steps)
    for i in range(steps):
        out[i] = predict_next(model, window, advance_clock(next_exo, i))
        window = window[1:] + [out[i]]
    return out


def penalized_loss(model: ForecastModel, features: np.ndarray, targets: np.ndarray) -> float:
    """Squared error plus the ridge penalty the model was fit with (unclamped)."""
    w = model.coefficients
    residuals = np.asarray(targets) - np.asarray(features) @ w
    return math.fsum(residuals * residuals) + model.ridge_lambda * math.fsum(w[:-1] * w[:-1])


def _paired(actual: Sequence[float], predicted: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape or a.ndim != 1:
        raise ValueError(f"actual and predicted differ in shape: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise ValueError("cannot score an empty series")
    return a, p


def mse(actual: Sequence[float], predicted: Sequence[float]) -> float:
    """Mean squared error with compensated summation."""
    a, p = _paired(actual, predicted)
    d = a - p
    return math.fsum(d * d) / a.size


def mae(actual: Sequence[float], predicted: Sequence[float]) -> float:
    a, p = _paired(actual, predicted)
    return math.fsum(np.abs(a - p)) / a.size


def evaluate(model: ForecastModel, features: np.ndarray, targets: np.ndarray) -> ForecastMetrics:
    predicted = predict_rows(model, features)
    return ForecastMetrics(mse=mse(targets, predicted), mae=mae(targets, predicted), n_points=len(targets))
