"""Price-elastic customer demand and the per-hour visit generator.

:func:`demand_rate` is the expected arrivals per hour. :func:`simulate_hour`
draws the arrivals, fills, baskets and checkout durations of one hour in a
single vectorized pass: every arrival consumes a fixed row of 16 uniforms,
so an hour's outcome depends only on its own random stream.

Volumes are integer mgal and the tank is drawn down in arrival order; the
first arrival to find the tank empty and everyone after it is turned away.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from scripts.sim.customers import BASE_CDF, ITEM_PRICES_CENTS, N_ITEMS, CustomerPopulation
from scripts.sim.exogenous import ExogenousState
from scripts.sim.rng import Rng64, next_poisson, uniforms
from scripts.sim.station import CheckoutMode, MGAL_PER_GALLON, StationParams, to_mills

__all__ = [
    'VisitKind',
    'CustomerVisit',
    'StationState',
    'HourOutcome',
    'demand_rate',
    'simulate_hour',
    'revenue_cents',
]

ARRIVAL_WINDOW_S = 3540
MAX_BASKET = 4
_UNIFORMS_PER_VISIT = 16


class VisitKind(str, Enum):
    FUEL = 'fuel'
    SHOP = 'shop'
    TURNED_AWAY = 'turned_away'


@dataclass(frozen=True)
class CustomerVisit:
    """One arrival. ``user_id`` is -1 for transient customers, ``dispenser`` 0 for shop-only."""

    hour: int
    offset_s: int
    user_id: int
    dispenser: int
    gallons_mgal: int
    price_mills: int
    basket: tuple[int, ...]
    checkout_ms: int
    kind: VisitKind

    def __post_init__(self) -> None:
        if (self.gallons_mgal > 0) != (self.kind is VisitKind.FUEL):
            raise ValueError(f"{self.kind.value} visit cannot carry {self.gallons_mgal} mgal")

    @property
    def timestamp(self) -> float:
        return self.hour + self.offset_s / 3600.0

    @property
    def gallons(self) -> float:
        return self.gallons_mgal / MGAL_PER_GALLON

    @property
    def fuel_price_paid(self) -> float:
        return self.price_mills / 1000.0

    @property
    def checkout_seconds(self) -> float:
        return self.checkout_ms / 1000.0

    @property
    def time_s(self) -> int:
        """Seconds since the start of the episode."""
        return self.hour * 3600 + self.offset_s


@dataclass(frozen=True)
class StationState:
    """What the demand model needs to know about the station before an hour."""

    hour: int
    exo: ExogenousState
    tank_level_mgal: int
    gap_ewma: float = 0.0


@dataclass(frozen=True)
class HourOutcome:
    hour: int
    price_mills: int
    gallons_sold_mgal: int = 0
    revenue_cents: int = 0
    cost_cents: int = 0
    visits: int = 0
    turned_away: int = 0
    shop_revenue_cents: int = 0


def revenue_cents(volume_mgal: int, price_mills: int) -> int:
    """Exact cents for ``volume_mgal`` at ``price_mills``, half rounded up."""
    return (volume_mgal * price_mills + 5_000) // 10_000


def demand_rate(posted_price: float, exo: ExogenousState, params: StationParams) -> float:
    """Expected customers per hour at ``posted_price`` ($/gal)."""
    if posted_price <= 0:
        raise ValueError(f"posted_price must be > 0, got {posted_price}")
    rate = (
        params.base_arrival_rate
        * params.daypart_multipliers[exo.hour_of_day]
        * (1.0 - params.weather_damping * exo.weather_index)
        * (1.0 + params.traffic_gain * exo.traffic_index)
        * math.exp(-params.elasticity_beta * (posted_price - exo.competitor_price))
    )
    if exo.event_flag:
        rate *= 1.0 + params.event_gain
    return max(0.0, rate)


def simulate_hour(
    state: StationState,
    posted_price: float,
    params: StationParams,
    rng: Rng64,
    *,
    population: Optional[CustomerPopulation] = None,
    detailed: bool = True,
) -> tuple[HourOutcome, tuple[CustomerVisit, ...], Rng64]:
    """Draw one hour of arrivals at ``posted_price``.

    A fuel customer's wanted volume is the Gaussian fill rounded to mgal and
    floored at 1 mgal, so a zero sale always means the tank ran dry and the
    customer is counted as turned away. Sales are capped by the fuel left
    after earlier arrivals in the hour.

    Args:
        state: Hour, world factors, tank level and smoothed price gap.
        posted_price: Posted fuel price ($/gal).
        params: Station parameters.
        rng: Demand stream for this hour.
        population: Repeat-customer preferences; without it every arrival
            is a transient customer buying from category popularity.
        detailed: Build :class:`CustomerVisit` objects. Aggregates are
            identical either way.

    Returns:
        The hour's aggregates, its visits in arrival order, and the advanced
        generator.
    """
    price_mills = to_mills(posted_price)
    rate = demand_rate(posted_price, state.exo, params)
    rng, n = next_poisson(rng, rate)
    if n == 0:
        return HourOutcome(hour=state.hour, price_mills=price_mills), (), rng

    rng, flat = uniforms(rng, _UNIFORMS_PER_VISIT * n)
    u = flat.reshape(n, _UNIFORMS_PER_VISIT)
    offsets = np.floor(u[:, 0] * ARRIVAL_WINDOW_S).astype(np.int64)
    order = np.argsort(offsets, kind='stable')
    u = u[order]
    offsets = offsets[order]

    shop_only = u[:, 1] < params.shop_only_prob
    z = np.sqrt(-2.0 * np.log(1.0 - u[:, 2])) * np.cos(2.0 * np.pi * u[:, 3])
    wanted = np.maximum(1, np.rint((params.gallons_mean + params.gallons_sd * z) * MGAL_PER_GALLON))
    wanted = np.where(shop_only, 0, wanted).astype(np.int64)
    drawn_before = np.cumsum(wanted) - wanted
    sold = np.clip(state.tank_level_mgal - drawn_before, 0, wanted)
    turned_away = ~shop_only & (sold == 0)
    fueled = ~shop_only & ~turned_away
    served = ~turned_away

    p_repeat = params.repeat_probability(state.gap_ewma) if population is not None else 0.0
    is_repeat = u[:, 4] < p_repeat
    n_users = population.n_users if population is not None else 1
    users = np.where(is_repeat, np.minimum((u[:, 5] * n_users).astype(np.int64), n_users - 1), -1)

    has_basket = shop_only | (fueled & (u[:, 6] < params.shop_attach_prob))
    sizes = np.where(has_basket, 1 + np.minimum((u[:, 7] * MAX_BASKET).astype(np.int64), MAX_BASKET - 1), 0)
    if population is not None:
        cdf_rows = np.where(is_repeat[:, None], population.user_cdf[np.maximum(users, 0)], BASE_CDF[None, :])
    else:
        cdf_rows = np.broadcast_to(BASE_CDF, (n, N_ITEMS))
    draws = u[:, 8:8 + MAX_BASKET]
    items = np.minimum((cdf_rows[:, None, :] <= draws[:, :, None]).sum(axis=2), N_ITEMS - 1)
    in_basket = np.arange(MAX_BASKET)[None, :] < sizes[:, None]

    n_disp = params.n_dispensers
    dispensers = np.where(shop_only, 0, 1 + np.minimum((u[:, 12] * n_disp).astype(np.int64), n_disp - 1))

    means = np.full(n, params.manual_checkout_mean)
    if params.checkout_mode is CheckoutMode.SMART:
        means = np.where(u[:, 13] < params.recognition_success_prob, params.smart_checkout_mean, means)
    checkout_ms = np.where(served, np.rint(-means * np.log(1.0 - u[:, 14]) * 1000.0), 0).astype(np.int64)

    sold_total = int(sold.sum())
    outcome = HourOutcome(
        hour=state.hour,
        price_mills=price_mills,
        gallons_sold_mgal=sold_total,
        revenue_cents=revenue_cents(sold_total, price_mills),
        cost_cents=revenue_cents(sold_total, state.exo.wholesale_mills),
        visits=n,
        turned_away=int(turned_away.sum()),
        shop_revenue_cents=int(ITEM_PRICES_CENTS[items][in_basket].sum()),
    )
    if not detailed:
        return outcome, (), rng

    kinds = np.where(shop_only, 1, np.where(turned_away, 2, 0))
    kind_of = (VisitKind.FUEL, VisitKind.SHOP, VisitKind.TURNED_AWAY)
    visits = tuple(
        CustomerVisit(
            hour=state.hour,
            offset_s=int(offsets[k]),
            user_id=int(users[k]),
            dispenser=int(dispensers[k]),
            gallons_mgal=int(sold[k]),
            price_mills=price_mills,
            basket=tuple(int(i) for i in items[k, : sizes[k]]),
            checkout_ms=int(checkout_ms[k]),
            kind=kind_of[kinds[k]],
        )
        for k in range(n)
    )
    return outcome, visits, rng
