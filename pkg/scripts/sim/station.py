"""Station parameters and their invariants.

:class:`StationParams` is the single parameter object the simulator, the
pricing state encoder and the governance loop read. Nested profiles group
the exogenous walk, the vibration frame generator and the vehicle scan
model so a scenario file can override each group as a unit.

All parameters are plain floats and ints in customer-facing units
(gallons, dollars, seconds). Conversion to the fixed-point units used in
the episode log happens at the simulator boundary:

    - volume: integer thousandths of a gallon (``mgal``)
    - money: integer cents
    - prices: integer mills ($0.001)

``validate()`` raises :class:`~scripts.errors.ConfigError` naming the
first field whose invariant fails; ``run_episode`` calls it before the
first hour.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from scripts.errors import ConfigError

__all__ = [
    'CheckoutMode',
    'DEFAULT_DAYPART_MULTIPLIERS',
    'ExogenousDynamics',
    'VibrationProfile',
    'VehicleProfile',
    'StationParams',
    'MGAL_PER_GALLON',
    'MILLS_PER_DOLLAR',
    'to_mgal',
    'to_mills',
]

MGAL_PER_GALLON = 1000
MILLS_PER_DOLLAR = 1000

DEFAULT_DAYPART_MULTIPLIERS: tuple[float, ...] = (
    0.25, 0.2, 0.2, 0.2, 0.25, 0.4,          # 00-05
    1.2, 1.6, 1.6, 1.3, 1.1,                 # 06-10
    1.0, 1.1, 1.1, 1.0, 1.0, 1.2,            # 11-16
    1.6, 1.6, 1.3, 1.0, 0.8,                 # 17-21
    0.6, 0.4,                                # 22-23
)


def to_mgal(gallons: float) -> int:
    return int(round(gallons * MGAL_PER_GALLON))


def to_mills(dollars: float) -> int:
    return int(round(dollars * MILLS_PER_DOLLAR))


class CheckoutMode(str, Enum):
    MANUAL = 'manual'
    SMART = 'smart'


@dataclass(frozen=True)
class ExogenousDynamics:
    """Random-walk settings for weather, traffic, competitor and wholesale prices.

    Daypart means are indexed night, morning, midday, evening.
    """

    reversion: float = 0.1
    index_step_sd: float = 0.05
    weather_means: tuple[float, float, float, float] = (0.35, 0.3, 0.2, 0.3)
    traffic_means: tuple[float, float, float, float] = (0.1, 0.7, 0.5, 0.75)
    margin_target: float = 0.25
    margin_reversion: float = 0.1
    margin_step_sd: float = 0.005
    wholesale_daily_sd: float = 0.005
    event_prob: float = 0.05
    initial_wholesale: float = 2.75


@dataclass(frozen=True)
class VibrationProfile:
    """Dispenser vibration frame generator (one frame per dispenser per day)."""

    n_samples: int = 1024
    sample_rate: float = 1000.0
    tones: tuple[tuple[float, float], ...] = ((30.0, 1.0), (60.0, 0.6), (250.0, 0.3))
    noise_sd: float = 0.2
    fault_hz: float = 120.0
    frame_hour: int = 12
    sample_scale: float = 1000.0

    @property
    def reference_amplitude(self) -> float:
        """Amplitude a fault magnitude of 1.0 corresponds to."""
        return self.tones[0][1] if self.tones else 1.0


@dataclass(frozen=True)
class VehicleProfile:
    """On-forecourt vehicle scans of repeat customers."""

    scan_prob: float = 0.25
    tire_mean_psi: float = 32.0
    tire_sd_psi: float = 1.0
    battery_mean_v: float = 12.6
    battery_phi: float = 0.8
    battery_sd_v: float = 0.02


@dataclass(frozen=True)
class StationParams:
    """Every tunable of the simulated station.

    Attributes:
        base_arrival_rate: Customers per hour before contextual multipliers.
        daypart_multipliers: 24 hour-of-day multipliers.
        weather_damping: Demand reduction per unit of adverse weather.
        traffic_gain: Demand increase per unit of traffic.
        elasticity_beta: Demand decay per dollar of price above competitor.
        event_gain: Demand increase on local event days.
        gallons_mean: Mean fill size (gallons).
        gallons_sd: Fill size standard deviation (gallons).
        shop_attach_prob: Probability a fueling visit also buys in the shop.
        shop_only_prob: Probability an arrival only uses the shop.
        tank_capacity: Underground tank capacity (gallons).
        initial_tank_level: Tank level at hour 0 (gallons).
        delivery_lead_time: Hours between ordering and delivery.
        checkout_mode: ``manual`` or ``smart`` checkout.
        recognition_success_prob: Smart checkout recognition success rate.
        manual_checkout_mean: Mean manual checkout duration (seconds).
        smart_checkout_mean: Mean recognized checkout duration (seconds).
        n_repeat_users: Size of the persistent customer population.
        n_dispensers: Number of dispensers on the forecourt.
        max_price_premium: Highest allowed premium over the competitor ($/gal).
        retention_intercept: Logistic intercept of the repeat probability.
        retention_slope: Logistic slope per dollar of smoothed price gap.
        retention_memory: EWMA weight of the latest hourly price gap.
        gauge_noise_sd: Tank gauge measurement noise (gallons).
    """

    base_arrival_rate: float = 20.0
    daypart_multipliers: tuple[float, ...] = DEFAULT_DAYPART_MULTIPLIERS
    weather_damping: float = 0.4
    traffic_gain: float = 0.5
    elasticity_beta: float = 2.0
    event_gain: float = 0.3
    gallons_mean: float = 10.0
    gallons_sd: float = 3.0
    shop_attach_prob: float = 0.3
    shop_only_prob: float = 0.05
    tank_capacity: float = 20000.0
    initial_tank_level: float = 8000.0
    delivery_lead_time: int = 8
    checkout_mode: CheckoutMode = CheckoutMode.SMART
    recognition_success_prob: float = 0.979
    manual_checkout_mean: float = 150.0
    smart_checkout_mean: float = 55.0
    n_repeat_users: int = 200
    n_dispensers: int = 4
    max_price_premium: float = 0.30
    retention_intercept: float = 1.0
    retention_slope: float = 4.0
    retention_memory: float = 0.05
    gauge_noise_sd: float = 2.0
    exogenous: ExogenousDynamics = field(default_factory=ExogenousDynamics)
    vibration: VibrationProfile = field(default_factory=VibrationProfile)
    vehicle: VehicleProfile = field(default_factory=VehicleProfile)

    @property
    def tank_capacity_mgal(self) -> int:
        return to_mgal(self.tank_capacity)

    @property
    def initial_tank_mgal(self) -> int:
        return to_mgal(self.initial_tank_level)

    def base_daypart_rate(self, hour_of_day: int) -> float:
        return self.base_arrival_rate * self.daypart_multipliers[hour_of_day]

    def repeat_probability(self, gap_ewma: float) -> float:
        """Logistic repeat-visit probability for a smoothed price gap ($/gal)."""
        return 1.0 / (1.0 + math.exp(-(self.retention_intercept - self.retention_slope * gap_ewma)))

    def validate(self) -> None:
        """Raise :class:`ConfigError` on the first violated invariant."""
        _require(self.base_arrival_rate >= 0, 'base_arrival_rate', "must be >= 0")
        _require(len(self.daypart_multipliers) == 24, 'daypart_multipliers', "needs exactly 24 values")
        _require(all(m > 0 for m in self.daypart_multipliers), 'daypart_multipliers', "values must be > 0")
        _require(self.weather_damping >= 0, 'weather_damping', "must be >= 0")
        _require(self.weather_damping <= 1, 'weather_damping', "must be <= 1 so demand stays non-negative")
        _require(self.traffic_gain >= 0, 'traffic_gain', "must be >= 0")
        _require(self.elasticity_beta >= 0, 'elasticity_beta', "must be >= 0")
        _require(self.event_gain >= 0, 'event_gain', "must be >= 0")
        _require(self.gallons_mean > 0, 'gallons_mean', "must be > 0")
        _require(self.gallons_sd >= 0, 'gallons_sd', "must be >= 0")
        _require(
            self.gallons_mean - 3 * self.gallons_sd > 0,
            'gallons_sd',
            "gallons_mean - 3 * gallons_sd must be > 0",
        )
        for name in ('shop_attach_prob', 'shop_only_prob', 'recognition_success_prob', 'retention_memory'):
            value = getattr(self, name)
            _require(0.0 <= value <= 1.0, name, "must be within [0, 1]")
        _require(self.tank_capacity > 0, 'tank_capacity', "must be > 0")
        _require(
            0 <= self.initial_tank_level <= self.tank_capacity,
            'initial_tank_level',
            "must be within [0, tank_capacity]",
        )
        _require(self.delivery_lead_time >= 1, 'delivery_lead_time', "must be >= 1 hour")
        _require(self.manual_checkout_mean > 0, 'manual_checkout_mean', "must be > 0")
        _require(self.smart_checkout_mean > 0, 'smart_checkout_mean', "must be > 0")
        _require(self.n_repeat_users >= 1, 'n_repeat_users', "must be >= 1")
        _require(self.n_dispensers >= 1, 'n_dispensers', "must be >= 1")
        _require(self.max_price_premium >= 0, 'max_price_premium', "must be >= 0")
        _require(self.gauge_noise_sd >= 0, 'gauge_noise_sd', "must be >= 0")
        _validate_exogenous(self.exogenous)
        _validate_vibration(self.vibration)


def _require(condition: bool, name: str, message: str, *, prefix: Optional[str] = None) -> None:
    if not condition:
        raise ConfigError(message, field=f"{prefix}.{name}" if prefix else name)


def _validate_exogenous(dyn: ExogenousDynamics) -> None:
    _require(0 <= dyn.reversion <= 1, 'reversion', "must be within [0, 1]", prefix='exogenous')
    _require(dyn.index_step_sd >= 0, 'index_step_sd', "must be >= 0", prefix='exogenous')
    for name in ('weather_means', 'traffic_means'):
        means = getattr(dyn, name)
        _require(len(means) == 4 and all(0 <= m <= 1 for m in means), name,
                 "needs 4 values within [0, 1]", prefix='exogenous')
    _require(dyn.margin_step_sd >= 0, 'margin_step_sd', "must be >= 0", prefix='exogenous')
    _require(dyn.wholesale_daily_sd >= 0, 'wholesale_daily_sd', "must be >= 0", prefix='exogenous')
    _require(0 <= dyn.event_prob <= 1, 'event_prob', "must be within [0, 1]", prefix='exogenous')
    _require(dyn.initial_wholesale > 0, 'initial_wholesale', "must be > 0", prefix='exogenous')


def _validate_vibration(profile: VibrationProfile) -> None:
    n = profile.n_samples
    _require(n >= 8 and n & (n - 1) == 0, 'n_samples', "must be a power of two >= 8", prefix='vibration')
    _require(profile.sample_rate > 0, 'sample_rate', "must be > 0", prefix='vibration')
    _require(0 < profile.fault_hz < profile.sample_rate / 2, 'fault_hz',
             "must lie below the Nyquist frequency", prefix='vibration')
    _require(0 <= profile.frame_hour <= 23, 'frame_hour', "must be an hour of day", prefix='vibration')
