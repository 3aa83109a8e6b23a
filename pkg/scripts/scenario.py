"""Scenario configuration: schema, strict parsing and digest.

A scenario is a JSON object. Every key is optional and falls back to a
documented default, so ``{}`` is the default scenario and ``{"seed":7}``
the default scenario on seed 7::

    {
      "seed": 7,
      "horizon_days": 90,
      "station": {"elasticity_beta": 2.5, "vibration": {"fault_hz": 120.0}},
      "pricing": {"policy": "greedy", "episodes": 300},
      "inventory": {"policy_kind": "forecast_driven"},
      "faults": [{"kind": "leak", "start_hour": 240, "magnitude": 0.005}]
    }

Parsing is strict: unknown keys, wrong JSON types and violated invariants
raise :class:`~scripts.errors.ConfigError` naming the dotted key and the
line it appears on. The digest is computed over the canonical form of the
fully defaulted scenario, so two files that spell the same scenario
differently share a digest.

Converters turn each section into the dataclass the engines consume.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Literal, Optional, Sequence, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from scripts.errors import ConfigError
from scripts.governance.hub import MonitorSettings
from scripts.governance.inventory import ForecasterSettings, InventoryPolicy, InventoryPolicyKind
from scripts.pricing.policies import PolicyKind
from scripts.pricing.qlearning import QLearnParams, RewardWeights
from scripts.recommender.factorization import MfSettings
from scripts.sim.episode import SimulationConfig
from scripts.sim.faults import FaultInjection, FaultKind
from scripts.sim.station import (
    CheckoutMode,
    ExogenousDynamics,
    StationParams,
    VehicleProfile,
    VibrationProfile,
)
from scripts.utils import logging_system as log

__all__ = [
    'ScenarioConfig',
    'StationSection',
    'PricingSection',
    'InventorySection',
    'ForecasterSection',
    'RecommenderSection',
    'MonitorSection',
    'FaultSection',
    'DIGEST_LENGTH',
    'parse_config',
    'load_config',
]

logger = log.get_logger(__name__)

DIGEST_LENGTH = 16
"""Hex characters of the sha256 kept as the scenario digest."""

_STATION = StationParams()
_EXO = ExogenousDynamics()
_VIB = VibrationProfile()
_VEH = VehicleProfile()
_QL = QLearnParams()
_INV = InventoryPolicy()
_FC = ForecasterSettings()
_MF = MfSettings()
_MON = MonitorSettings()


class _Section(BaseModel):
    model_config = ConfigDict(extra='forbid', strict=True, frozen=True)


# ============================================================================
# STATION
# ============================================================================

class ExogenousSection(_Section):
    reversion: float = _EXO.reversion
    index_step_sd: float = _EXO.index_step_sd
    weather_means: tuple[float, float, float, float] = _EXO.weather_means
    traffic_means: tuple[float, float, float, float] = _EXO.traffic_means
    margin_target: float = _EXO.margin_target
    margin_reversion: float = _EXO.margin_reversion
    margin_step_sd: float = _EXO.margin_step_sd
    wholesale_daily_sd: float = _EXO.wholesale_daily_sd
    event_prob: float = _EXO.event_prob
    initial_wholesale: float = _EXO.initial_wholesale


class VibrationSection(_Section):
    n_samples: int = _VIB.n_samples
    sample_rate: float = _VIB.sample_rate
    tones: tuple[tuple[float, float], ...] = _VIB.tones
    noise_sd: float = _VIB.noise_sd
    fault_hz: float = _VIB.fault_hz
    frame_hour: int = _VIB.frame_hour
    sample_scale: float = _VIB.sample_scale


class VehicleSection(_Section):
    scan_prob: float = Field(_VEH.scan_prob, ge=0.0, le=1.0)
    tire_mean_psi: float = _VEH.tire_mean_psi
    tire_sd_psi: float = Field(_VEH.tire_sd_psi, ge=0.0)
    battery_mean_v: float = _VEH.battery_mean_v
    battery_phi: float = Field(_VEH.battery_phi, ge=0.0, lt=1.0)
    battery_sd_v: float = Field(_VEH.battery_sd_v, ge=0.0)


class StationSection(_Section):
    """Station parameters; invariants are checked by :meth:`StationParams.validate`."""

    base_arrival_rate: float = _STATION.base_arrival_rate
    daypart_multipliers: tuple[float, ...] = _STATION.daypart_multipliers
    weather_damping: float = _STATION.weather_damping
    traffic_gain: float = _STATION.traffic_gain
    elasticity_beta: float = _STATION.elasticity_beta
    event_gain: float = _STATION.event_gain
    gallons_mean: float = _STATION.gallons_mean
    gallons_sd: float = _STATION.gallons_sd
    shop_attach_prob: float = _STATION.shop_attach_prob
    shop_only_prob: float = _STATION.shop_only_prob
    tank_capacity: float = _STATION.tank_capacity
    initial_tank_level: float = _STATION.initial_tank_level
    delivery_lead_time: int = _STATION.delivery_lead_time
    checkout_mode: Literal['manual', 'smart'] = _STATION.checkout_mode.value
    recognition_success_prob: float = _STATION.recognition_success_prob
    manual_checkout_mean: float = _STATION.manual_checkout_mean
    smart_checkout_mean: float = _STATION.smart_checkout_mean
    n_repeat_users: int = _STATION.n_repeat_users
    n_dispensers: int = _STATION.n_dispensers
    max_price_premium: float = _STATION.max_price_premium
    retention_intercept: float = _STATION.retention_intercept
    retention_slope: float = _STATION.retention_slope
    retention_memory: float = _STATION.retention_memory
    gauge_noise_sd: float = _STATION.gauge_noise_sd
    exogenous: ExogenousSection = Field(default_factory=ExogenousSection)
    vibration: VibrationSection = Field(default_factory=VibrationSection)
    vehicle: VehicleSection = Field(default_factory=VehicleSection)

    def to_params(self) -> StationParams:
        scalars = self.model_dump(exclude={'exogenous', 'vibration', 'vehicle', 'checkout_mode'})
        return StationParams(
            **scalars,
            checkout_mode=CheckoutMode(self.checkout_mode),
            exogenous=ExogenousDynamics(**self.exogenous.model_dump()),
            vibration=VibrationProfile(**self.vibration.model_dump()),
            vehicle=VehicleProfile(**self.vehicle.model_dump()),
        )


# ============================================================================
# ENGINES
# ============================================================================

class RewardSection(_Section):
    revenue: float = Field(_QL.reward_weights.revenue, ge=0.0)
    volume: float = Field(_QL.reward_weights.volume, ge=0.0)
    retention: float = Field(_QL.reward_weights.retention, ge=0.0)


class PricingSection(_Section):
    """Q-learning settings plus the policy ``simulate`` runs with."""

    policy: Literal['greedy', 'fixed_margin', 'competitor_match'] = PolicyKind.GREEDY.value
    alpha: float = Field(_QL.alpha, gt=0.0, le=1.0)
    gamma: float = Field(_QL.gamma, ge=0.0, lt=1.0)
    epsilon_start: float = Field(_QL.epsilon_start, ge=0.0, le=1.0)
    epsilon_end: float = Field(_QL.epsilon_end, ge=0.0, le=1.0)
    epsilon_decay_episodes: int = Field(_QL.epsilon_decay_episodes, ge=0)
    episodes: int = Field(_QL.episodes, ge=0)
    episode_days: int = Field(_QL.episode_days, ge=1)
    reward_weights: RewardSection = Field(default_factory=RewardSection)

    @model_validator(mode='after')
    def _decaying_epsilon(self) -> PricingSection:
        if self.epsilon_end > self.epsilon_start:
            raise ValueError("epsilon_end must not exceed epsilon_start")
        return self

    @property
    def policy_kind(self) -> PolicyKind:
        return PolicyKind(self.policy)

    def to_params(self) -> QLearnParams:
        return QLearnParams(
            alpha=self.alpha,
            gamma=self.gamma,
            epsilon_start=self.epsilon_start,
            epsilon_end=self.epsilon_end,
            epsilon_decay_episodes=self.epsilon_decay_episodes,
            episodes=self.episodes,
            episode_days=self.episode_days,
            reward_weights=RewardWeights(**self.reward_weights.model_dump()),
        )


class InventorySection(_Section):
    """Replenishment settings. The lead time is the station's ``delivery_lead_time``."""

    policy_kind: Literal['forecast_driven', 'fixed_schedule'] = _INV.policy_kind.value
    service_level_z: float = _INV.service_level_z
    order_up_to: float = _INV.order_up_to
    holding_cost: float = _INV.holding_cost
    stockout_penalty: float = _INV.stockout_penalty
    fixed_interval: int = _INV.fixed_interval

    def to_policy(self, lead_time: int) -> InventoryPolicy:
        return InventoryPolicy(
            policy_kind=InventoryPolicyKind(self.policy_kind),
            service_level_z=self.service_level_z,
            order_up_to=self.order_up_to,
            lead_time=lead_time,
            holding_cost=self.holding_cost,
            stockout_penalty=self.stockout_penalty,
            fixed_interval=self.fixed_interval,
        )


class ForecasterSection(_Section):
    n_lags: int = Field(_FC.n_lags, ge=1)
    ridge_lambda: float = Field(_FC.ridge_lambda, ge=0.0)
    train_window_hours: int = Field(_FC.train_window_hours, ge=1)
    backtest_hours: int = Field(_FC.backtest_hours, ge=0)
    enabled: bool = _FC.enabled

    def to_settings(self) -> ForecasterSettings:
        return ForecasterSettings(**self.model_dump())


class RecommenderSection(_Section):
    k: int = Field(_MF.k, ge=1)
    reg_lambda: float = Field(_MF.reg_lambda, ge=0.0)
    learning_rate: float = Field(_MF.learning_rate, gt=0.0)
    epochs: int = Field(_MF.epochs, ge=1)
    holdout_fraction: float = Field(0.2, gt=0.0, lt=1.0)
    top_k: int = Field(5, ge=1)

    def to_settings(self) -> MfSettings:
        return MfSettings(k=self.k, reg_lambda=self.reg_lambda, learning_rate=self.learning_rate, epochs=self.epochs)


class MonitorSection(_Section):
    enabled: bool = _MON.enabled
    cusum_k: float = Field(_MON.cusum_k, ge=0.0)
    cusum_h: float = Field(_MON.cusum_h, gt=0.0)
    leak_warmup_hours: int = Field(_MON.leak_warmup_hours, ge=2)
    vibration_ratio_threshold: float = Field(_MON.vibration_ratio_threshold, gt=0.0)
    vibration_band_half_width: int = Field(_MON.vibration_band_half_width, ge=0)
    battery_z_threshold: float = Field(_MON.battery_z_threshold, gt=0.0)
    battery_window: int = Field(_MON.battery_window, ge=2)
    auth_window_s: int = Field(_MON.auth_window_s, ge=0)

    def to_settings(self) -> MonitorSettings:
        return MonitorSettings(**self.model_dump())


class FaultSection(_Section):
    kind: Literal['leak', 'vibration', 'battery', 'tire', 'fraud']
    start_hour: int = Field(ge=0)
    magnitude: float = Field(ge=0.0)
    asset: Optional[str] = None

    def to_injection(self) -> FaultInjection:
        return FaultInjection(FaultKind(self.kind), self.start_hour, self.magnitude, self.asset)


# ============================================================================
# SCENARIO
# ============================================================================

class ScenarioConfig(_Section):
    """A complete, fully defaulted scenario."""

    seed: int = Field(1, ge=0, lt=2**64)
    horizon_days: int = Field(90, ge=1)
    station: StationSection = Field(default_factory=StationSection)
    pricing: PricingSection = Field(default_factory=PricingSection)
    inventory: InventorySection = Field(default_factory=InventorySection)
    forecaster: ForecasterSection = Field(default_factory=ForecasterSection)
    recommender: RecommenderSection = Field(default_factory=RecommenderSection)
    monitor: MonitorSection = Field(default_factory=MonitorSection)
    faults: tuple[FaultSection, ...] = ()

    def canonical_json(self) -> str:
        """Sorted-key, whitespace-free JSON of every field."""
        return json.dumps(self.model_dump(mode='json'), sort_keys=True, separators=(',', ':'))

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.canonical_json().encode('ascii')).hexdigest()[:DIGEST_LENGTH]

    @property
    def horizon_hours(self) -> int:
        return self.horizon_days * 24

    def with_seed(self, seed: int) -> ScenarioConfig:
        return self.model_copy(update={'seed': seed})

    def station_params(self) -> StationParams:
        return self.station.to_params()

    def simulation_config(self) -> SimulationConfig:
        return SimulationConfig(
            seed=self.seed,
            station=self.station_params(),
            faults=tuple(f.to_injection() for f in self.faults),
            holding_cost=self.inventory.holding_cost,
            config_digest=self.digest,
        )

    def inventory_policy(self) -> InventoryPolicy:
        return self.inventory.to_policy(self.station.delivery_lead_time)

    def qlearn_params(self) -> QLearnParams:
        return self.pricing.to_params()

    def check(self) -> None:
        """Raise :class:`ConfigError` on the first violated cross-field invariant."""
        station = self.station_params()
        try:
            station.validate()
        except ConfigError as exc:
            raise ConfigError(exc.message, field=f"station.{exc.field}") from None
        self.inventory_policy().validate(station.tank_capacity)
        try:
            self.qlearn_params()
        except ValueError as exc:
            raise ConfigError(str(exc), field='pricing') from None


def _line_of(text: str, path: Sequence[Union[str, int]]) -> Optional[int]:
    """1-based line of the innermost key of ``path`` that can be found in ``text``."""
    position, found = 0, None
    for part in path:
        if not isinstance(part, str):
            continue
        index = text.find(f'"{part}"', position)
        if index < 0:
            break
        position = found = index
    if found is None:
        return None
    return text.count('\n', 0, found) + 1


def _from_validation_error(exc: ValidationError, text: str) -> ConfigError:
    first = exc.errors()[0]
    loc = tuple(first.get('loc', ()))
    name = '.'.join(str(part) for part in loc) or '<root>'
    if first.get('type') == 'extra_forbidden':
        message = "unknown key"
    else:
        message = first.get('msg', 'invalid value')
    return ConfigError(message, field=name, line=_line_of(text, loc))


def parse_config(data: Union[bytes, str]) -> ScenarioConfig:
    """Strictly parse a scenario document.

    Args:
        data: UTF-8 JSON text of a single object.

    Returns:
        The fully defaulted scenario.

    Raises:
        ConfigError: Malformed JSON, an unknown key, a type mismatch or a
            violated invariant, naming the key and its line.
    """
    try:
        text = data.decode('utf-8') if isinstance(data, bytes) else data
    except UnicodeDecodeError as exc:
        raise ConfigError(f"not UTF-8 text ({exc.reason})", field='<document>') from None
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, field='<document>', line=exc.lineno) from None
    if not isinstance(document, dict):
        raise ConfigError("scenario must be a JSON object", field='<document>', line=1)

    try:
        scenario = ScenarioConfig.model_validate_json(text)
    except ValidationError as exc:
        raise _from_validation_error(exc, text) from None
    try:
        scenario.check()
    except ConfigError as exc:
        raise ConfigError(
            exc.message, field=exc.field, line=_line_of(text, exc.field.split('.'))
        ) from None
    logger.debug(f"parsed scenario {scenario.digest} (seed {scenario.seed}, {scenario.horizon_days} days)")
    return scenario


def load_config(path: Union[str, Path, None]) -> ScenarioConfig:
    """Read and parse the scenario at ``path``; ``None`` gives the default scenario."""
    if path is None:
        return parse_config(b'{}')
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"scenario file not found: {path}")
    return parse_config(path.read_bytes())
