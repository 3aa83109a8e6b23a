"""Fuel-station simulator (sim-core).

Subpackage Architecture:
    **Randomness** (rng.py):
        SplitMix64 generator with named substreams. Every draw in the
        package goes through it, which is what makes episodes reproducible.

    **World and station** (station.py, exogenous.py):
        Station parameters with their invariants, and the hourly walk of
        weather, traffic, competitor and wholesale prices.

    **Customers** (customers.py, demand.py):
        Store catalog, persistent repeat-customer preferences, the
        price-elastic arrival model and the per-hour visit generator.

    **Faults and sensors** (faults.py, sensors.py):
        Injected equipment faults and the IoT streams they show up in.

    **Episodes** (episode.py):
        The hour loop tying policies, controller and simulator together.

Example:
    >>> from scripts.sim import SimulationConfig, run_episode
    >>> from scripts.pricing.policies import CompetitorMatchPolicy
    >>> from scripts.governance.hub import ReplenishmentController
    >>> log = run_episode(
    ...     SimulationConfig(seed=42),
    ...     CompetitorMatchPolicy(),
    ...     ReplenishmentController.default(),
    ...     horizon_hours=24 * 7,
    ... )  # doctest: +SKIP
"""

from .episode import (
    ControlDecision,
    EpisodeLog,
    HourRecord,
    MarketView,
    OrderRecord,
    PricingPolicy,
    Repair,
    SimulationConfig,
    StationController,
    StationView,
    run_episode,
)
from .station import StationParams

__all__ = [
    'ControlDecision',
    'EpisodeLog',
    'HourRecord',
    'MarketView',
    'OrderRecord',
    'PricingPolicy',
    'Repair',
    'SimulationConfig',
    'StationController',
    'StationParams',
    'StationView',
    'run_episode',
]
