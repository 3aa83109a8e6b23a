#!/usr/bin/env python3
"""Command-line entry point for forecourt.

This module is the only human interface to the fuel station digital twin.
Each subcommand reads a scenario (or a previous run), calls the matching
function of :mod:`scripts.experiments` and writes its results under
``--out``:

    - **simulate**: one governed episode; ``events.ndx``, ``frames/``,
      ``kpi.csv`` and ``kpi.txt``
    - **train-pricing**: Q-learning run; ``qtable.csv`` and ``curve.csv``
    - **bench-pricing**: trained greedy policy against both baselines on
      paired seeds; ``uplift.csv``
    - **backtest-forecast**: ARX against persistence;
      ``forecast_backtest.csv`` and ``forecast_overlay.csv``
    - **train-recommender**: matrix factorization of a logged episode;
      ``factors.csv``, ``heatmap.csv`` and ``recommender_metrics.csv``
    - **replay**: recompute the KPIs of an event log; ``kpi.csv``
    - **report**: print the KPI table of a run directory to stdout
    - **compare-inventory**: forecast-driven against weekly replenishment
    - **service-effect**: fault exposure with and without maintenance

Architecture:
    Every subcommand body runs inside :func:`run_step`, which logs the step,
    maps failures to exit codes and exits immediately. Diagnostics go to
    standard error and the log file under ``.logs/forecourt/``; only
    ``report`` writes to standard output.

Exit Codes:
    - 0: success
    - 1: invalid scenario, bad arguments, missing input or malformed log
    - 2: runtime failure, including a replay whose KPIs disagree with the log

Usage:
    Simulate the default scenario with the fixed-margin baseline:
        $ python main.py simulate --out out/run-1 --policy fixed_margin

    Verify and print a run:
        $ python main.py replay --log out/run-1/events.ndx --out out/replay-1
        $ python main.py report --run out/run-1

    Benchmark pricing over ten seeds on four processes:
        $ python main.py bench-pricing --config scenario.json --seeds 10 --workers 4 --out out/bench

Notes:
    - ``--config`` is optional; without it the documented defaults apply
    - Shell completion available if ``argcomplete`` is installed

See Also:
    config.py: File names and exit codes
    scripts.scenario: Scenario schema
    scripts.experiments: The functions behind each subcommand
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence

import pydantic

import config
from scripts import experiments
from scripts.errors import ConfigError, WireFormatError
from scripts.governance.kpi import format_kpi_table, read_kpi_csv, write_kpi_csv
from scripts.scenario import ScenarioConfig, load_config
from scripts.telemetry.replay import replay
from scripts.utils import logging_system as log

try:
    import argcomplete
    ARGCOMPLETE_AVAILABLE = True
except ImportError:
    ARGCOMPLETE_AVAILABLE = False

from __version__ import __version__

__all__ = ['main', 'run_step', 'build_parser', 'exit_code_for']

POLICY_CHOICES = ('greedy', 'fixed_margin', 'competitor_match')

_INPUT_ERRORS = (ConfigError, pydantic.ValidationError, WireFormatError, FileNotFoundError)


def exit_code_for(exc: BaseException) -> int:
    """Exit code of a failed step: 1 for bad input, 2 for anything else.

    Example:
        >>> exit_code_for(FileNotFoundError("scenario.json"))
        1
        >>> exit_code_for(RuntimeError("diverged"))
        2
    """
    return config.EXIT_INPUT_ERROR if isinstance(exc, _INPUT_ERRORS) else config.EXIT_RUNTIME_ERROR


def run_step(step_name: str, func: Callable[[], Any]) -> Any:
    """Execute one subcommand step with logging and exit-code mapping.

    A step fails when ``func`` returns ``False`` (exit 2) or raises (exit
    code from :func:`exit_code_for`). Failures are logged with the path of
    the log file and the traceback.

    Args:
        step_name: Human-readable name used in log messages.
        func: Zero-argument callable doing the work.

    Returns:
        Whatever ``func`` returned.

    Raises:
        SystemExit: On failure, with code 1 or 2.
    """
    log.info(f"--- {step_name} ---")
    try:
        result = func()
    except Exception as e:
        log.error(f"Error in {step_name}: {e}", exc_info=True)
        sys.exit(exit_code_for(e))

    if isinstance(result, bool) and not result:
        log.error(f"{step_name} failed.")
        sys.exit(config.EXIT_RUNTIME_ERROR)

    log.success(f"{step_name} completed successfully.")
    return result


# ============================================================================
# SUBCOMMANDS
# ============================================================================

def _scenario(args: argparse.Namespace) -> ScenarioConfig:
    config.validate_run_inputs(args.config)
    scenario = load_config(args.config)
    log.info(f"Scenario {scenario.digest} (seed {scenario.seed}, {scenario.horizon_days} days)")
    return scenario


def _report_paths(paths: dict[str, Path]) -> None:
    for name, path in paths.items():
        log.info(f"  {name}: {path}")


def cmd_simulate(args: argparse.Namespace) -> bool:
    scenario = _scenario(args)
    run = experiments.simulate(scenario, args.policy, show_progress=True)
    _report_paths(experiments.write_run(args.out, run))
    return True


def cmd_train_pricing(args: argparse.Namespace) -> bool:
    result = experiments.train_pricing(_scenario(args), show_progress=True)
    _report_paths(experiments.write_training(args.out, result))
    return True


def cmd_bench_pricing(args: argparse.Namespace) -> bool:
    scenario = _scenario(args)
    seeds = experiments.seed_range(args.seeds)
    vlog = log.get_verbose_logger()
    with log.log_execution_time("bench-pricing"):
        frame = experiments.bench_pricing(scenario, seeds, workers=args.workers, show_progress=True)
    mean = frame.iloc[-1]
    with vlog.step("Pricing benchmark"):
        vlog.metric("Seeds", len(seeds))
        vlog.metric("Mean greedy margin ($)", f"{mean['margin_greedy']:.2f}")
        vlog.metric("Mean fixed-margin margin ($)", f"{mean['margin_fixed']:.2f}")
        vlog.metric("Mean competitor-match margin ($)", f"{mean['margin_match']:.2f}")
    log.info(f"Mean uplift over fixed margin: {mean['uplift_pct']:.2f}%")
    _report_paths({'uplift': experiments.write_uplift(args.out, frame)})
    return True


def cmd_backtest_forecast(args: argparse.Namespace) -> bool:
    result = experiments.backtest_forecast(_scenario(args), show_progress=True)
    log.info(
        f"Mean MSE: ARX {result.mean_arx_mse:.4f}, persistence {result.mean_persistence_mse:.4f}"
    )
    _report_paths(experiments.write_backtest(args.out, result))
    return True


def cmd_train_recommender(args: argparse.Namespace) -> bool:
    config.validate_run_inputs(args.from_log)
    logged = replay(args.from_log)
    run = experiments.fit_recommender(logged.episode, show_progress=True)
    vlog = log.get_verbose_logger()
    with vlog.step("Recommender metrics"):
        for name, value in run.metrics.items():
            vlog.metric(name, f"{value:.4f}")
    log.info(f"Holdout RMSE {run.metrics['holdout_rmse']:.4f}")
    _report_paths(experiments.write_recommender(args.out, run))
    return True


def cmd_replay(args: argparse.Namespace) -> bool:
    config.validate_run_inputs(args.log)
    result = replay(args.log)
    _report_paths({'kpi': write_kpi_csv(Path(args.out) / config.KPI_FILE, result.recomputed)})
    log.info(f"Replayed {len(result.recomputed)} KPI rows from {args.log}")
    if not result.conserved:
        log.warning("Tank conservation does not hold for the replayed episode")
    for mismatch in result.mismatches:
        log.error(
            f"KPI mismatch hours [{mismatch.start}, {mismatch.end}) {mismatch.field}: "
            f"logged {mismatch.embedded}, replayed {mismatch.replayed}",
            include_log_path=False,
        )
    return result.ok


def cmd_report(args: argparse.Namespace) -> bool:
    config.validate_run_inputs(args.run, directory=True)
    frame = read_kpi_csv(Path(args.run) / config.KPI_FILE)
    print(format_kpi_table(frame))
    return True


def cmd_compare_inventory(args: argparse.Namespace) -> bool:
    comparison = experiments.compare_inventory(
        _scenario(args), experiments.seed_range(args.seeds), show_progress=True
    )
    log.info(
        f"Forecast-driven wins {comparison.wins}/{len(comparison.frame)} seeds, "
        f"holding cost reduced {comparison.holding_reduction_pct:.1f}%"
    )
    path = experiments.write_frame(Path(args.out) / config.INVENTORY_COMPARISON_FILE, comparison.frame)
    _report_paths({'comparison': path})
    return True


def cmd_service_effect(args: argparse.Namespace) -> bool:
    frame = experiments.service_effect(_scenario(args), experiments.seed_range(args.seeds), show_progress=True)
    path = experiments.write_frame(Path(args.out) / config.SERVICE_EFFECT_FILE, frame)
    _report_paths({'service_effect': path})
    return True


# ============================================================================
# ARGUMENT PARSING
# ============================================================================

def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='forecourt',
        description='Fuel station digital twin: simulation, pricing, forecasting and monitoring.',
        epilog="""
Usage:
  %(prog)s simulate --config scenario.json --out out/run-1
  %(prog)s bench-pricing --seeds 10 --out out/bench
  %(prog)s replay --log out/run-1/events.ndx --out out/replay-1
  %(prog)s report --run out/run-1

Exit codes: 0 success, 1 configuration or input error, 2 runtime error.
        """,
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}',
                        help="Show program version and exit")
    parser.add_argument('-v', '--verbose', action='store_true',
                        help="Enable verbose (DEBUG) logging on the console")

    commands = parser.add_subparsers(dest='command', required=True, metavar='COMMAND')

    def scenario_command(name: str, handler: Callable, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, help=help_text, description=help_text)
        sub.add_argument('--config', metavar='F', help="Scenario JSON file (default: built-in defaults)")
        sub.add_argument('--out', metavar='DIR', required=True, help="Output directory")
        sub.set_defaults(handler=handler, step=help_text)
        return sub

    sub = scenario_command('simulate', cmd_simulate, "Simulate one governed episode")
    sub.add_argument('--policy', choices=POLICY_CHOICES,
                     help="Pricing policy (default: the scenario's pricing.policy)")

    scenario_command('train-pricing', cmd_train_pricing, "Train the Q-learning price controller")

    sub = scenario_command('bench-pricing', cmd_bench_pricing, "Benchmark trained pricing against baselines")
    sub.add_argument('--seeds', type=_positive_int, default=config.DEFAULT_BENCH_SEEDS, metavar='N',
                     help=f"Number of paired seeds (default: {config.DEFAULT_BENCH_SEEDS})")
    sub.add_argument('--workers', type=_positive_int, default=1, metavar='W',
                     help="Worker processes evaluating seeds (default: 1)")

    scenario_command('backtest-forecast', cmd_backtest_forecast, "Backtest ARX against persistence")

    sub = commands.add_parser('train-recommender', help="Factorize the baskets of a logged episode")
    sub.add_argument('--from-log', metavar='L', required=True, help="events.ndx of a simulate run")
    sub.add_argument('--out', metavar='DIR', required=True, help="Output directory")
    sub.set_defaults(handler=cmd_train_recommender, step="Train the recommender")

    sub = commands.add_parser('replay', help="Recompute and verify the KPIs of an event log")
    sub.add_argument('--log', metavar='L', required=True, help="events.ndx to replay")
    sub.add_argument('--out', metavar='DIR', required=True, help="Output directory")
    sub.set_defaults(handler=cmd_replay, step="Replay event log")

    sub = commands.add_parser('report', help="Print the KPI table of a run directory")
    sub.add_argument('--run', metavar='DIR', required=True, help="Run directory holding kpi.csv")
    sub.set_defaults(handler=cmd_report, step="KPI report")

    sub = scenario_command('compare-inventory', cmd_compare_inventory,
                           "Compare forecast-driven and weekly replenishment")
    sub.add_argument('--seeds', type=_positive_int, default=config.DEFAULT_COMPARE_SEEDS, metavar='N',
                     help=f"Number of paired seeds (default: {config.DEFAULT_COMPARE_SEEDS})")

    sub = scenario_command('service-effect', cmd_service_effect,
                           "Measure fault exposure with and without maintenance")
    sub.add_argument('--seeds', type=_positive_int, default=config.DEFAULT_COMPARE_SEEDS, metavar='N',
                     help=f"Number of seeds (default: {config.DEFAULT_COMPARE_SEEDS})")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, configure logging and run one subcommand.

    Returns:
        ``config.EXIT_OK`` on success. Failures leave through
        :class:`SystemExit` raised by :func:`run_step`; argument errors
        return ``config.EXIT_INPUT_ERROR``.
    """
    parser = build_parser()

    # Enable shell completion if available
    if ARGCOMPLETE_AVAILABLE:
        argcomplete.autocomplete(parser)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return config.EXIT_OK if exc.code in (0, None) else config.EXIT_INPUT_ERROR

    if args.verbose:
        log.setup_logging(module_name='__main__', log_level=logging.getLevelName(logging.DEBUG), verbose=True)
    else:
        log.setup_logging(module_name='__main__', log_level=logging.getLevelName(config.LOG_LEVEL),
                          simple_mode=True)
    log.info(f"forecourt {__version__}: {args.command}")

    out = getattr(args, 'out', None)
    if out is not None:
        config.ensure_directories(out)

    run_step(args.step, lambda: args.handler(args))
    return config.EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
