"""Fuel station digital twin for forecourt.

This package simulates one fuel station hour by hour and runs the learning
and monitoring engines that operate it.

Package Architecture:
    **Simulation** (``sim/``):
        Seeded random streams, station state, exogenous signals, customers,
        demand, fault injection, sensors and the hourly episode loop.

    **Engines**:
        - pricing/: tabular Q-learning price controller and baselines
        - forecast/: ARX demand forecaster with rolling backtests
        - recommender/: matrix factorization over loyalty interactions
        - monitor/: leak CUSUM, spectral vibration, battery and fraud checks

    **Operations** (``governance/``):
        Replenishment, KPI aggregation, maintenance booking and the hub
        that routes alerts and applies decisions inside an episode.

    **Telemetry** (``telemetry/``):
        Canonical ``events.ndx`` log, frame sidecars and replay.

    **Top-level modules**:
        - scenario: JSON scenario schema, validation and digest
        - experiments: runs, benchmarks and comparisons behind the CLI
        - errors: exceptions shared across subpackages

Module Attributes:
    __version__ (str): Current package version from __version__.py

Example:
    >>> from scripts.scenario import load_config
    >>> from scripts.experiments import simulate
    >>> scenario = load_config(None)
    >>> run = simulate(scenario, 'fixed_margin')  # doctest: +SKIP

See Also:
    main.py: Command-line entry point
    config.py: Paths, file names and exit codes
"""

from __version__ import __version__

__all__ = ['__version__']
