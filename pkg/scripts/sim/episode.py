"""Episode runner: the hour-by-hour loop every engine trains and evaluates against.

One hour of :func:`run_episode`, in order:

    1. advance the exogenous world (hour 0 uses the initial state);
    2. apply repairs booked for this hour, then any delivery due now;
    3. ask the pricing policy for a price (floored at wholesale cost);
    4. simulate arrivals, draw down the tank, apply any injected leak;
    5. update the smoothed price gap behind customer retention;
    6. emit the hour's sensor telemetry (detailed runs only);
    7. append the hour record and let the pricing policy observe it;
    8. hand the station view to the controller, which may order fuel,
       raise alerts, book repairs, publish forecasts and KPI rows.

All volumes are integer mgal, so

    sum(delivered) - sum(sold) - sum(leaked) == final level - initial level

holds exactly for every episode.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Any, Callable, Optional, Protocol, Sequence, TypeVar

from scripts.errors import ConfigError
from scripts.monitor.alerts import Alert
from scripts.sim.customers import CustomerPopulation, build_population
from scripts.sim.demand import CustomerVisit, StationState, demand_rate, simulate_hour
from scripts.sim.exogenous import ExogenousState, initial_exogenous, step_exogenous
from scripts.sim.faults import FaultInjection, FaultKind, active_faults
from scripts.sim.rng import Stream, substream
from scripts.sim.sensors import (
    AuthEvent,
    FlowEvent,
    SensorState,
    TankReading,
    VehicleReading,
    VibrationFrame,
    sense_hour,
)
from scripts.sim.station import MGAL_PER_GALLON, StationParams
from scripts.utils import logging_system as log

if TYPE_CHECKING:
    from scripts.governance.kpi import KpiReport

__all__ = [
    'SimulationConfig',
    'HourRecord',
    'OrderRecord',
    'Repair',
    'EpisodeLog',
    'MarketView',
    'StationView',
    'ControlDecision',
    'PricingPolicy',
    'StationController',
    'run_episode',
    'MIN_HORIZON_HOURS',
]

logger = log.get_logger(__name__)

MIN_HORIZON_HOURS = 24
_HOLDING_DIVISOR = 240_000_000
_PPM = 1_000_000

T = TypeVar('T')


@dataclass(frozen=True)
class SimulationConfig:
    """Everything besides the policies that determines an episode.

    Attributes:
        seed: Root seed of every random stream.
        station: Station parameters.
        faults: Injected faults.
        holding_cost: Inventory holding cost ($/gal/day).
        config_digest: Checksum of the scenario that produced this config.
    """

    seed: int
    station: StationParams = field(default_factory=StationParams)
    faults: tuple[FaultInjection, ...] = ()
    holding_cost: float = 0.002
    config_digest: str = ''

    @property
    def holding_udollars(self) -> int:
        """Holding cost in millionths of a dollar per gallon per day."""
        return int(round(self.holding_cost * 1_000_000))


@dataclass(frozen=True)
class HourRecord:
    """Everything that happened at the station in one hour.

    Money in cents, volume in mgal, prices in mills. ``forecast_mgal`` is
    -1 when no forecast was published for the hour.
    """

    hour: int
    exo: ExogenousState
    posted_price_mills: int
    gallons_sold_mgal: int
    revenue_cents: int
    cost_cents: int
    visits: int
    turned_away: int
    tank_level_mgal: int
    delivered_mgal: int = 0
    leak_mgal: int = 0
    holding_cents: int = 0
    shop_revenue_cents: int = 0
    retention_delta_ppm: int = 0
    forecast_mgal: int = -1
    alerts: tuple[Alert, ...] = ()

    @property
    def posted_price(self) -> float:
        return self.posted_price_mills / 1000.0

    @property
    def gallons_sold(self) -> float:
        return self.gallons_sold_mgal / MGAL_PER_GALLON

    @property
    def tank_level(self) -> float:
        return self.tank_level_mgal / MGAL_PER_GALLON

    @property
    def revenue(self) -> float:
        return self.revenue_cents / 100.0

    @property
    def margin_cents(self) -> int:
        return self.revenue_cents - self.cost_cents

    @property
    def retention_delta(self) -> float:
        return self.retention_delta_ppm / _PPM


@dataclass(frozen=True)
class OrderRecord:
    hour: int
    qty_mgal: int
    arrival_hour: int


@dataclass(frozen=True)
class Repair:
    """Service visit clearing every fault on ``asset_id`` from ``hour`` on."""

    hour: int
    asset_id: str


def _between(items: Sequence[T], start: int, end: int, key: Callable[[T], int]) -> list[T]:
    lo = bisect.bisect_left(items, start, key=key)
    hi = bisect.bisect_left(items, end, key=key)
    return list(items[lo:hi])


@dataclass(eq=False)
class EpisodeLog:
    """Evidence record of one simulated run."""

    config_digest: str
    seed: int
    initial_tank_mgal: int
    detailed: bool = True
    hourly_records: list[HourRecord] = field(default_factory=list)
    visit_records: list[CustomerVisit] = field(default_factory=list)
    tank_readings: list[TankReading] = field(default_factory=list)
    auth_events: list[AuthEvent] = field(default_factory=list)
    flow_events: list[FlowEvent] = field(default_factory=list)
    vehicle_readings: list[VehicleReading] = field(default_factory=list)
    orders: list[OrderRecord] = field(default_factory=list)
    frames: list[VibrationFrame] = field(default_factory=list)
    kpi_rows: list['KpiReport'] = field(default_factory=list)

    @property
    def n_hours(self) -> int:
        return len(self.hourly_records)

    @property
    def final_tank_mgal(self) -> int:
        return self.hourly_records[-1].tank_level_mgal if self.hourly_records else self.initial_tank_mgal

    def visits_between(self, start: int, end: int) -> list[CustomerVisit]:
        """Visits with ``start <= hour < end``."""
        return _between(self.visit_records, start, end, key=lambda v: v.hour)

    def auths_between(self, start: int, end: int) -> list[AuthEvent]:
        return _between(self.auth_events, start * 3600, end * 3600, key=lambda e: e.t_s)

    def flows_between(self, start: int, end: int) -> list[FlowEvent]:
        return _between(self.flow_events, start * 3600, end * 3600, key=lambda e: e.t_s)

    def vehicles_between(self, start: int, end: int) -> list[VehicleReading]:
        return _between(self.vehicle_readings, start, end, key=lambda r: r.timestamp)

    def frames_between(self, start: int, end: int) -> list[VibrationFrame]:
        return _between(self.frames, start, end, key=lambda f: f.hour)

    def tank_between(self, start: int, end: int) -> list[TankReading]:
        return _between(self.tank_readings, start, end, key=lambda r: r.timestamp)


@dataclass(frozen=True)
class MarketView:
    """What a pricing policy sees before posting the hour's price."""

    hour: int
    exo: ExogenousState
    previous_price_mills: int
    demand_rate: float
    params: StationParams


@dataclass(frozen=True)
class StationView:
    """What the station controller sees at the end of an hour."""

    hour: int
    log: EpisodeLog
    tank_level_mgal: int
    pending_mgal: int
    params: StationParams


@dataclass(frozen=True)
class ControlDecision:
    order_mgal: int = 0
    alerts: tuple[Alert, ...] = ()
    repairs: tuple[Repair, ...] = ()
    forecasts: tuple[tuple[int, int], ...] = ()
    reports: tuple[Any, ...] = ()


class PricingPolicy(Protocol):
    def decide(self, market: MarketView) -> int:
        """Price to post this hour, in mills."""
        ...

    def observe(self, record: HourRecord) -> None:
        ...


class StationController(Protocol):
    def on_hour_end(self, view: StationView) -> ControlDecision:
        ...

    def on_episode_end(self, view: StationView) -> ControlDecision:
        ...


def _clear_repaired(
    faults: Sequence[FaultInjection], cleared: set[int], repairs: list[Repair], hour: int
) -> list[Repair]:
    due = [r for r in repairs if r.hour <= hour]
    for repair in due:
        for index, fault in enumerate(faults):
            if fault.start_hour <= hour and fault.asset_id == repair.asset_id:
                cleared.add(index)
        logger.debug(f"hour {hour}: repaired {repair.asset_id}")
    return [r for r in repairs if r.hour > hour]


def run_episode(
    config: SimulationConfig,
    pricing_policy: PricingPolicy,
    inventory_policy: StationController,
    horizon_hours: int,
    *,
    detailed: bool = True,
    population: Optional[CustomerPopulation] = None,
) -> EpisodeLog:
    """Simulate ``horizon_hours`` hours of the station.

    Args:
        config: Seed, station parameters, faults and holding cost.
        pricing_policy: Posts the hourly price.
        inventory_policy: Station controller (replenishment, monitoring, KPIs).
        horizon_hours: Number of hours, at least 24.
        detailed: Record visits and telemetry. Training runs switch this
            off; hourly aggregates are identical either way.
        population: Pre-built customer population for ``config.seed``.

    Returns:
        The episode log.

    Raises:
        ConfigError: Horizon or parameters violate an invariant.
    """
    if horizon_hours < MIN_HORIZON_HOURS:
        raise ConfigError(f"must be >= {MIN_HORIZON_HOURS}, got {horizon_hours}", field='horizon_hours')
    if config.holding_cost < 0:
        raise ConfigError("must be >= 0", field='holding_cost')
    params = config.station
    params.validate()
    if population is None:
        population = build_population(config.seed, params.n_repeat_users)

    seed = config.seed
    capacity = params.tank_capacity_mgal
    episode = EpisodeLog(
        config_digest=config.config_digest,
        seed=seed,
        initial_tank_mgal=params.initial_tank_mgal,
        detailed=detailed,
    )
    exo_rng = substream(seed, Stream.EXOGENOUS)
    exo = initial_exogenous(params)
    level = params.initial_tank_mgal
    previous_price = exo.competitor_mills
    gap_ewma = 0.0
    parity_repeat = params.repeat_probability(0.0)
    memory = params.retention_memory
    pending: Optional[OrderRecord] = None
    repairs: list[Repair] = []
    cleared: set[int] = set()
    forecasts: dict[int, int] = {}
    sensor_state = SensorState()

    def apply(decision: ControlDecision, hour: int) -> None:
        nonlocal pending, repairs
        if decision.alerts:
            last = episode.hourly_records[-1]
            episode.hourly_records[-1] = replace(last, alerts=last.alerts + tuple(decision.alerts))
        repairs = repairs + list(decision.repairs)
        forecasts.update(decision.forecasts)
        episode.kpi_rows.extend(decision.reports)
        if decision.order_mgal > 0:
            if pending is not None:
                logger.debug(f"hour {hour}: order ignored, {pending.qty_mgal} mgal still pending")
            else:
                pending = OrderRecord(hour, decision.order_mgal, hour + params.delivery_lead_time)
                episode.orders.append(pending)

    for hour in range(horizon_hours):
        if hour > 0:
            exo, exo_rng = step_exogenous(exo, params, exo_rng)
        repairs = _clear_repaired(config.faults, cleared, repairs, hour)

        delivered = 0
        if pending is not None and pending.arrival_hour == hour:
            delivered = min(pending.qty_mgal, capacity - level)
            level += delivered
            pending = None

        market = MarketView(
            hour=hour,
            exo=exo,
            previous_price_mills=previous_price,
            demand_rate=demand_rate(previous_price / 1000.0, exo, params),
            params=params,
        )
        proposed = int(pricing_policy.decide(market))
        price = max(proposed, exo.wholesale_mills)
        if price != proposed:
            logger.debug(f"hour {hour}: price {proposed} mills clamped to wholesale {price}")

        state = StationState(hour=hour, exo=exo, tank_level_mgal=level, gap_ewma=gap_ewma)
        outcome, visits, _ = simulate_hour(
            state, price / 1000.0, params, substream(seed, Stream.DEMAND, hour),
            population=population, detailed=detailed,
        )
        level -= outcome.gallons_sold_mgal

        active = active_faults(config.faults, hour, frozenset(cleared))
        leak_ppm = sum(int(round(f.magnitude * _PPM)) for _, f in active if f.kind is FaultKind.LEAK)
        leaked = min(level, level * leak_ppm // _PPM)
        level -= leaked

        gap_ewma = (1.0 - memory) * gap_ewma + memory * (price - exo.competitor_mills) / 1000.0
        retention_ppm = int(round((params.repeat_probability(gap_ewma) - parity_repeat) * _PPM))

        record = HourRecord(
            hour=hour,
            exo=exo,
            posted_price_mills=price,
            gallons_sold_mgal=outcome.gallons_sold_mgal,
            revenue_cents=outcome.revenue_cents,
            cost_cents=outcome.cost_cents,
            visits=outcome.visits,
            turned_away=outcome.turned_away,
            tank_level_mgal=level,
            delivered_mgal=delivered,
            leak_mgal=leaked,
            holding_cents=level * config.holding_udollars // _HOLDING_DIVISOR,
            shop_revenue_cents=outcome.shop_revenue_cents,
            retention_delta_ppm=retention_ppm,
            forecast_mgal=forecasts.pop(hour, -1),
        )
        episode.hourly_records.append(record)
        episode.visit_records.extend(visits)

        if detailed:
            batch = sense_hour(
                seed=seed, hour=hour, visits=visits, tank_level_mgal=level,
                sold_mgal=outcome.gallons_sold_mgal, delivered_mgal=delivered,
                faults=active, params=params, state=sensor_state,
            )
            episode.tank_readings.append(batch.tank)
            episode.auth_events.extend(batch.auths)
            episode.flow_events.extend(batch.flows)
            episode.vehicle_readings.extend(batch.vehicles)
            episode.frames.extend(batch.frames)

        pricing_policy.observe(record)
        view = StationView(hour, episode, level, pending.qty_mgal if pending else 0, params)
        apply(inventory_policy.on_hour_end(view), hour)
        previous_price = price

    view = StationView(horizon_hours - 1, episode, level, pending.qty_mgal if pending else 0, params)
    final = inventory_policy.on_episode_end(view)
    apply(replace(final, order_mgal=0), horizon_hours - 1)
    logger.debug(
        f"episode seed={seed} hours={horizon_hours} sold={sum(r.gallons_sold_mgal for r in episode.hourly_records)} mgal"
    )
    return episode
