# config.py
"""Centralized configuration for forecourt.

This module is the single source of truth for project paths, output file
names, exit codes and logging defaults. Scenario parameters (station,
pricing, inventory, monitoring, faults) are *not* configured here: they
live in the scenario JSON validated by :mod:`scripts.scenario`, so that a
run is fully described by its scenario file and its digest.

Architecture:
    **Fail-Fast Validation**: :func:`validate_run_inputs` checks every input
    path a subcommand needs before any work starts and raises a descriptive
    :class:`FileNotFoundError` immediately.

    **Immutable Constants**: Paths are computed once at import time and
    should be treated as read-only. Subcommands write only under the
    directory given with ``--out``.

Run Directory Layout:
    A ``simulate`` run directory looks like::

        run/
        ├── events.ndx            # canonical telemetry event log
        ├── frames/               # VIB1 vibration frame sidecars
        │   └── h00012-dispenser-1.vib
        └── kpi.csv               # one KPI row per simulated day

    Other subcommands add ``qtable.csv``/``curve.csv`` (train-pricing),
    ``uplift.csv`` (bench-pricing), ``forecast_backtest.csv``/
    ``forecast_overlay.csv`` (backtest-forecast), ``factors.csv``/
    ``heatmap.csv``/``recommender_metrics.csv`` (train-recommender),
    ``inventory_comparison.csv`` and ``service_effect.csv``.

Environment:
    Only logging reads the environment (``LOG_LEVEL``, ``LOG_VERBOSE``,
    ``LOG_FORMAT``, ``LOG_DIR``); nothing in the environment changes results.

Example:
    >>> import config
    >>> config.EVENTS_FILE
    'events.ndx'
    >>> config.validate_run_inputs('missing.json')  # doctest: +SKIP
    Traceback (most recent call last):
    FileNotFoundError: Input not found: missing.json

See Also:
    main.py: Uses the file names and exit codes defined here
    scripts.scenario: Scenario schema and defaults
"""
import logging
import os
from pathlib import Path
from typing import Optional, Union

try:
    from __version__ import __version__
except ImportError:
    __version__ = "0.1.0"

__all__ = [
    # Base paths
    'BASE_DIR', 'OUTPUT_DIR', 'LOGS_DIR',
    # Run outputs
    'EVENTS_FILE', 'FRAMES_DIR', 'KPI_FILE', 'KPI_TEXT_FILE',
    'QTABLE_FILE', 'CURVE_FILE', 'UPLIFT_FILE',
    'FORECAST_BACKTEST_FILE', 'FORECAST_OVERLAY_FILE',
    'FACTORS_FILE', 'HEATMAP_FILE', 'RECOMMENDER_METRICS_FILE',
    'INVENTORY_COMPARISON_FILE', 'SERVICE_EFFECT_FILE',
    # Exit codes
    'EXIT_OK', 'EXIT_INPUT_ERROR', 'EXIT_RUNTIME_ERROR',
    # Experiment defaults
    'DEFAULT_BENCH_SEEDS', 'DEFAULT_COMPARE_SEEDS',
    # Logging
    'LOG_LEVEL', 'LOG_NAME',
    # Public functions
    'ensure_directories', 'validate_run_inputs',
]

# ============================================================================
# BASE PATHS
# ============================================================================

BASE_DIR = os.path.dirname(os.path.abspath(__file__)) if '__file__' in globals() else os.getcwd()
"""Absolute path to the project root directory."""

OUTPUT_DIR = os.path.join(BASE_DIR, "output")
"""Default parent of run directories."""

LOGS_DIR = os.path.join(BASE_DIR, ".logs")
"""Directory for log files."""


# ============================================================================
# RUN OUTPUTS
# ============================================================================

EVENTS_FILE = "events.ndx"
"""Telemetry event log inside a run directory."""

FRAMES_DIR = "frames"
"""Subdirectory of a run holding vibration frame sidecars."""

KPI_FILE = "kpi.csv"
"""Daily KPI table."""

KPI_TEXT_FILE = "kpi.txt"
"""Plain-text rendering of the KPI table."""

QTABLE_FILE = "qtable.csv"
"""Trained Q-table."""

CURVE_FILE = "curve.csv"
"""Per-episode training reward curve."""

UPLIFT_FILE = "uplift.csv"
"""Pricing benchmark table."""

FORECAST_BACKTEST_FILE = "forecast_backtest.csv"
"""Per-window ARX and persistence errors."""

FORECAST_OVERLAY_FILE = "forecast_overlay.csv"
"""Actual against predicted demand over the last backtest week."""

FACTORS_FILE = "factors.csv"
"""Latent user and item factors."""

HEATMAP_FILE = "heatmap.csv"
"""Predicted user x item ratings."""

RECOMMENDER_METRICS_FILE = "recommender_metrics.csv"
"""Holdout RMSE, baseline RMSE and hit rate."""

INVENTORY_COMPARISON_FILE = "inventory_comparison.csv"
"""Forecast-driven against weekly replenishment."""

SERVICE_EFFECT_FILE = "service_effect.csv"
"""Fault exposure with and without maintenance."""


# ============================================================================
# EXIT CODES
# ============================================================================

EXIT_OK = 0
"""Success."""

EXIT_INPUT_ERROR = 1
"""Invalid scenario, unreadable or non-canonical input."""

EXIT_RUNTIME_ERROR = 2
"""Runtime failure, including a replay that disagrees with its log."""


# ============================================================================
# EXPERIMENT DEFAULTS
# ============================================================================

DEFAULT_BENCH_SEEDS = 10
"""Seeds evaluated by ``bench-pricing`` when ``--seeds`` is not given."""

DEFAULT_COMPARE_SEEDS = 10
"""Seeds of ``compare-inventory`` and ``service-effect``."""


# ============================================================================
# LOGGING CONFIGURATION
# ============================================================================

LOG_LEVEL = logging.INFO
"""Logging verbosity level (default: INFO)."""

LOG_NAME = "forecourt"
"""Root logger name; module loggers are its children."""


# ============================================================================
# UTILITY FUNCTIONS
# ============================================================================

def ensure_directories(*extra: Union[str, Path]) -> None:
    """Create the log directory and any ``extra`` output directories.

    Idempotent: existing directories are left alone.

    Example:
        >>> import config
        >>> config.ensure_directories('output/run-1')  # doctest: +SKIP
    """
    for directory in (LOGS_DIR, *extra):
        os.makedirs(directory, exist_ok=True)


def validate_run_inputs(*paths: Optional[Union[str, Path]], directory: bool = False) -> None:
    """Fail fast when an input a subcommand reads is missing.

    Args:
        *paths: Input files (or directories with ``directory=True``);
            ``None`` entries are skipped.
        directory: Require directories instead of files.

    Raises:
        FileNotFoundError: The first missing input, named in the message.
    """
    for path in paths:
        if path is None:
            continue
        path = Path(path)
        exists = path.is_dir() if directory else path.exists()
        if not exists:
            kind = "Directory" if directory else "Input"
            raise FileNotFoundError(f"{kind} not found: {path}")
