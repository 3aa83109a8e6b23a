"""Fuel replenishment: reorder point, demand forecaster and the ordering rule.

Two policies are supported:

    - ``forecast_driven``: order up to ``order_up_to`` when the tank level
      plus any pending order falls below the reorder point, i.e. the
      forecast lead-time demand plus ``z`` lead-time standard deviations;
    - ``fixed_schedule``: order up to ``order_up_to`` every
      ``fixed_interval`` hours whatever the level.

At most one order is outstanding at any time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from scripts.errors import ConfigError
from scripts.forecast.arx import ForecastModel, build_features, fit_arx, predict_horizon, predict_rows
from scripts.forecast.backtest import rolling_backtest
from scripts.sim.episode import ControlDecision, HourRecord, StationView
from scripts.sim.exogenous import ExogenousState, advance_clock
from scripts.sim.station import MGAL_PER_GALLON, to_mgal
from scripts.utils import logging_system as log

__all__ = [
    'InventoryPolicyKind',
    'InventoryPolicy',
    'ForecasterSettings',
    'DemandHistory',
    'DemandForecaster',
    'ReplenishmentController',
    'reorder_point',
    'inventory_decision',
    'seasonal_profile',
]

logger = log.get_logger(__name__)

_PROFILE_HOURS = 168


class InventoryPolicyKind(str, Enum):
    FORECAST_DRIVEN = 'forecast_driven'
    FIXED_SCHEDULE = 'fixed_schedule'


@dataclass(frozen=True)
class InventoryPolicy:
    """Replenishment settings.

    Attributes:
        policy_kind: ``forecast_driven`` or ``fixed_schedule``.
        service_level_z: Safety-stock multiplier of the lead-time sd.
        order_up_to: Target level after an order (gallons).
        lead_time: Hours between ordering and delivery.
        holding_cost: Holding cost ($/gal/day).
        stockout_penalty: Cost charged per turned-away customer ($).
        fixed_interval: Hours between scheduled orders (``fixed_schedule``).
    """

    policy_kind: InventoryPolicyKind = InventoryPolicyKind.FORECAST_DRIVEN
    service_level_z: float = 1.64
    order_up_to: float = 8000.0
    lead_time: int = 8
    holding_cost: float = 0.002
    stockout_penalty: float = 15.0
    fixed_interval: int = 168

    @property
    def order_up_to_mgal(self) -> int:
        return to_mgal(self.order_up_to)

    @classmethod
    def fixed_weekly(cls, tank_capacity: float, lead_time: int = 8) -> InventoryPolicy:
        """Weekly delivery filling the tank."""
        return cls(
            policy_kind=InventoryPolicyKind.FIXED_SCHEDULE,
            order_up_to=tank_capacity,
            lead_time=lead_time,
            fixed_interval=168,
        )

    def validate(self, tank_capacity: float) -> None:
        if self.order_up_to <= 0 or self.order_up_to > tank_capacity:
            raise ConfigError(f"must lie in (0, tank_capacity={tank_capacity}]", field='inventory.order_up_to')
        if self.service_level_z < 0:
            raise ConfigError("must be >= 0", field='inventory.service_level_z')
        if self.lead_time < 1:
            raise ConfigError("must be >= 1", field='inventory.lead_time')
        if self.holding_cost < 0 or self.stockout_penalty < 0:
            raise ConfigError("costs must be >= 0", field='inventory.holding_cost')
        if self.fixed_interval < 1:
            raise ConfigError("must be >= 1", field='inventory.fixed_interval')


@dataclass(frozen=True)
class ForecasterSettings:
    n_lags: int = 24
    ridge_lambda: float = 1e-3
    train_window_hours: int = 672
    backtest_hours: int = 168
    enabled: bool = True


@dataclass
class DemandHistory:
    """Hourly gallons sold and the exogenous state of each hour, from hour 0."""

    sales: list[float] = field(default_factory=list)
    exo: list[ExogenousState] = field(default_factory=list)

    def append(self, record: HourRecord) -> None:
        self.sales.append(record.gallons_sold_mgal / MGAL_PER_GALLON)
        self.exo.append(record.exo)

    def __len__(self) -> int:
        return len(self.sales)


def reorder_point(forecast: float, sigma_lead: float, z: float) -> float:
    """Lead-time demand plus ``z`` standard deviations of safety stock."""
    if forecast < 0 or sigma_lead < 0 or z < 0:
        raise ValueError(f"reorder point inputs must be >= 0, got {forecast}, {sigma_lead}, {z}")
    return forecast + z * sigma_lead


def seasonal_profile(history: DemandHistory, steps: int) -> tuple[np.ndarray, float]:
    """Hour-of-day means over the last week and the residual sd around them.

    Hours of day with no observation fall back to the overall mean.
    """
    if len(history) == 0:
        return np.zeros(steps), 0.0
    values = np.asarray(history.sales[-_PROFILE_HOURS:])
    hods = np.array([e.hour_of_day for e in history.exo[-_PROFILE_HOURS:]])
    sums = np.bincount(hods, weights=values, minlength=24)
    counts = np.bincount(hods, minlength=24)
    means = np.where(counts > 0, sums / np.maximum(counts, 1), values.mean())
    residual_sd = float(np.std(values - means[hods])) if values.size > 1 else 0.0
    start = history.exo[-1].hour_of_day + 1
    future = (start + np.arange(steps)) % 24
    return means[future], residual_sd


class DemandForecaster:
    """ARX forecaster refit on a trailing window, seasonal profile until enough history exists."""

    def __init__(self, settings: Optional[ForecasterSettings] = None) -> None:
        self.settings = settings or ForecasterSettings()
        self.model: Optional[ForecastModel] = None
        self.residual_sd = 0.0

    @property
    def required_history(self) -> int:
        return self.settings.train_window_hours + self.settings.n_lags

    def refresh(self, history: DemandHistory) -> bool:
        """Refit on the trailing window; returns whether a model is fitted.

        The hourly sd is taken from one-step backtest errors over the last
        ``backtest_hours`` hours. Until the history covers at least one
        backtest hour the in-sample residual sd stands in.
        """
        s = self.settings
        if not s.enabled or len(history) < self.required_history:
            return False
        window = self.required_history
        features, targets = build_features(history.sales[-window:], history.exo[-window:], s.n_lags)
        self.model = fit_arx(features, targets, s.ridge_lambda)
        span = min(len(history), window + s.backtest_hours)
        if span > window:
            result = rolling_backtest(
                history.sales[-span:], history.exo[-span:], s.n_lags, s.ridge_lambda, s.train_window_hours
            )
            residuals = np.asarray(result.actual) - np.asarray(result.arx_predicted)
            source = 'backtest'
        else:
            residuals = targets - predict_rows(self.model, features)
            source = 'in-sample'
        self.residual_sd = float(np.std(residuals))
        logger.debug(
            f"forecaster refit on {len(targets)} hours, {source} residual sd {self.residual_sd:.3f} gal "
            f"over {residuals.size} points"
        )
        return True

    def forecast(self, history: DemandHistory, steps: int) -> tuple[np.ndarray, float]:
        """Hourly forecasts for the next ``steps`` hours and the hourly sd."""
        if self.model is not None and len(history) >= self.model.n_lags:
            lags = history.sales[-self.model.n_lags:]
            path = predict_horizon(self.model, lags, advance_clock(history.exo[-1], 1), steps)
            return path, self.residual_sd
        return seasonal_profile(history, steps)

    def lead_time_demand(self, history: DemandHistory, lead_time: int) -> tuple[float, float]:
        """Expected demand over the next ``lead_time`` hours and its sd."""
        path, hourly_sd = self.forecast(history, lead_time)
        return float(path.sum()), hourly_sd * math.sqrt(lead_time)


def inventory_decision(
    tank_level_mgal: int,
    pending_mgal: int,
    policy: InventoryPolicy,
    forecaster: DemandForecaster,
    history: DemandHistory,
) -> Optional[int]:
    """Order quantity in mgal, or ``None``."""
    if pending_mgal > 0:
        return None
    target = policy.order_up_to_mgal
    if policy.policy_kind is InventoryPolicyKind.FIXED_SCHEDULE:
        if len(history) == 0 or (len(history) - 1) % policy.fixed_interval != 0:
            return None
        quantity = target - tank_level_mgal
        return quantity if quantity > 0 else None

    demand, sigma = forecaster.lead_time_demand(history, policy.lead_time)
    rop_mgal = to_mgal(reorder_point(demand, sigma, policy.service_level_z))
    if tank_level_mgal + pending_mgal >= rop_mgal:
        return None
    quantity = target - tank_level_mgal - pending_mgal
    return quantity if quantity > 0 else None


class ReplenishmentController:
    """Station controller that only manages fuel orders."""

    def __init__(self, policy: InventoryPolicy, forecaster: Optional[DemandForecaster] = None) -> None:
        self.policy = policy
        self.forecaster = forecaster or DemandForecaster()
        self.history = DemandHistory()

    @classmethod
    def default(cls) -> ReplenishmentController:
        """Forecast-driven ordering on the seasonal profile alone."""
        return cls(InventoryPolicy(), DemandForecaster(ForecasterSettings(enabled=False)))

    def observe(self, record: HourRecord) -> None:
        self.history.append(record)

    def order(self, view: StationView) -> Optional[int]:
        quantity = inventory_decision(
            view.tank_level_mgal, view.pending_mgal, self.policy, self.forecaster, self.history
        )
        if quantity is not None:
            logger.debug(f"hour {view.hour}: ordering {quantity} mgal at level {view.tank_level_mgal}")
        return quantity

    def on_hour_end(self, view: StationView) -> ControlDecision:
        self.observe(view.log.hourly_records[-1])
        if view.hour % 24 == 23:
            self.forecaster.refresh(self.history)
        return ControlDecision(order_mgal=self.order(view) or 0)

    def on_episode_end(self, view: StationView) -> ControlDecision:
        return ControlDecision()
