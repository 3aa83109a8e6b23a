"""Shared fixtures for the forecourt test suite."""

from __future__ import annotations

from typing import Callable

import numpy as np
import pytest

from scripts import experiments
from scripts.scenario import ScenarioConfig, parse_config
from scripts.sim.exogenous import ExogenousState
from scripts.utils import logging_system as log


@pytest.fixture(autouse=True)
def isolated_logging(tmp_path_factory, monkeypatch):
    """Send log files to a temporary directory and drop the logger after each test."""
    monkeypatch.setenv('LOG_DIR', str(tmp_path_factory.mktemp('logs')))
    yield
    log.reset_logging()


@pytest.fixture
def synthetic_exo() -> Callable[[int, int], list[ExogenousState]]:
    """Hourly exogenous states with every hour, weekday and event flag represented.

    Weather, traffic and competitor price are random, so design matrices
    built from the states have full column rank.
    """

    def build(n: int, seed: int = 0) -> list[ExogenousState]:
        rng = np.random.default_rng(seed)
        weather = rng.uniform(0.0, 1.0, n)
        traffic = rng.uniform(0.0, 1.0, n)
        competitor = 2.6 + 0.2 * rng.uniform(0.0, 1.0, n)
        events = rng.uniform(0.0, 1.0, n) < 0.3
        return [
            ExogenousState(
                weather_index=float(weather[t]),
                traffic_index=float(traffic[t]),
                competitor_price=float(competitor[t]),
                wholesale_cost=2.5,
                hour_of_day=t % 24,
                day_of_week=(t // 24) % 7,
                event_flag=bool(events[t]),
            )
            for t in range(n)
        ]

    return build


@pytest.fixture(scope='session')
def short_scenario() -> ScenarioConfig:
    """Three fixed-margin days with default monitoring."""
    return parse_config('{"seed": 3, "horizon_days": 3, "pricing": {"policy": "fixed_margin"}}')


@pytest.fixture(scope='session')
def short_run(short_scenario) -> experiments.SimulationRun:
    return experiments.simulate(short_scenario)


@pytest.fixture(scope='session')
def short_run_dir(tmp_path_factory, short_run):
    run_dir = tmp_path_factory.mktemp('run')
    experiments.write_run(run_dir, short_run)
    return run_dir
