"""Scenario runs and the experiments built on them.

Every function here is deterministic in its inputs: episodes are seeded
from the scenario, learned tables are trained on derived seeds, and
paired comparisons run each arm on the same seed. The CLI in ``main.py``
is a thin layer over these functions that adds file output.

    - :func:`simulate`: one governed episode under a pricing policy
    - :func:`train_pricing`: offline Q-learning against the simulator
    - :func:`bench_pricing`: trained greedy policy against both baselines
    - :func:`backtest_forecast`: ARX against persistence on simulated demand
    - :func:`fit_recommender`: matrix factorization of logged baskets
    - :func:`compare_inventory`: forecast-driven against weekly ordering
    - :func:`service_effect`: fault exposure with and without maintenance
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import pandas as pd
from tqdm import tqdm

import config
from scripts.forecast.backtest import BacktestResult, rolling_backtest
from scripts.forecast.series_io import episode_demand
from scripts.governance.hub import GovernanceHub, MonitorSettings
from scripts.governance.inventory import InventoryPolicy, InventoryPolicyKind
from scripts.governance.kpi import format_kpi_table, kpi_frame, write_kpi_csv
from scripts.governance.maintenance import Booking
from scripts.monitor.alerts import AlertKind
from scripts.pricing.policies import GreedyPricingPolicy, PolicyKind, baseline_policy
from scripts.pricing.qlearning import QTable
from scripts.pricing.tables import write_curve, write_qtable
from scripts.pricing.training import TrainingResult, train_policy
from scripts.recommender.factorization import (
    LatentFactors,
    hit_rate_at_k,
    rmse_holdout,
    train_mf,
)
from scripts.recommender.interactions import global_mean_rmse, interactions_from_visits, split_holdout
from scripts.recommender.io import write_factors, write_heatmap
from scripts.scenario import RecommenderSection, ScenarioConfig
from scripts.sim.episode import EpisodeLog, PricingPolicy, run_episode
from scripts.sim.faults import FaultInjection, FaultKind
from scripts.sim.rng import MASK64, Stream, substream
from scripts.sim.station import MGAL_PER_GALLON
from scripts.telemetry.event_log import write_event_log
from scripts.utils import logging_system as log

__all__ = [
    'SimulationRun',
    'RecommenderRun',
    'InventoryComparison',
    'simulate',
    'write_run',
    'train_pricing',
    'write_training',
    'episode_margin_cents',
    'bench_pricing',
    'write_uplift',
    'backtest_forecast',
    'write_backtest',
    'fit_recommender',
    'write_recommender',
    'compare_inventory',
    'service_effect',
    'write_frame',
    'seed_range',
    'DEFAULT_SERVICE_FAULTS',
]

logger = log.get_logger(__name__)

OVERLAY_HOURS = 168
"""Hours of actual-vs-predicted demand kept in the forecast overlay."""

DEFAULT_SERVICE_FAULTS: tuple[FaultInjection, ...] = (
    FaultInjection(FaultKind.LEAK, 240, 0.005),
    FaultInjection(FaultKind.VIBRATION, 480, 1.0),
)
"""Faults injected by :func:`service_effect` when the scenario has none."""


# ============================================================================
# SIMULATION
# ============================================================================

@dataclass
class SimulationRun:
    scenario: ScenarioConfig
    policy: PolicyKind
    episode: EpisodeLog
    hub: GovernanceHub
    table: Optional[QTable] = None


def _governance_hub(
    scenario: ScenarioConfig,
    *,
    inventory: Optional[InventoryPolicy] = None,
    monitors: Optional[MonitorSettings] = None,
    pricing: Optional[GreedyPricingPolicy] = None,
    table: Optional[QTable] = None,
    service_enabled: bool = True,
) -> GovernanceHub:
    return GovernanceHub(
        inventory or scenario.inventory_policy(),
        scenario.forecaster.to_settings(),
        monitors or scenario.monitor.to_settings(),
        pricing=pricing,
        table_source=(lambda: table) if table is not None else None,
        service_enabled=service_enabled,
    )


def _pricing_policy(kind: PolicyKind, table: Optional[QTable]) -> tuple[PricingPolicy, Optional[GreedyPricingPolicy]]:
    if kind is PolicyKind.GREEDY:
        if table is None:
            raise ValueError("the greedy policy needs a trained Q-table")
        greedy = GreedyPricingPolicy(table)
        return greedy, greedy
    return baseline_policy(kind), None


def simulate(
    scenario: ScenarioConfig,
    policy: Union[PolicyKind, str, None] = None,
    *,
    table: Optional[QTable] = None,
    show_progress: bool = False,
) -> SimulationRun:
    """Run one governed episode of ``scenario``.

    Args:
        scenario: The scenario; its pricing policy applies unless ``policy`` is given.
        policy: ``greedy``, ``fixed_margin`` or ``competitor_match``.
        table: Trained table for the greedy policy. Trained on the
            scenario when missing.
        show_progress: Show training progress bars.
    """
    kind = PolicyKind(policy) if policy is not None else scenario.pricing.policy_kind
    if kind is PolicyKind.GREEDY and table is None:
        table = train_pricing(scenario, show_progress=show_progress).table
    pricing, greedy = _pricing_policy(kind, table)
    hub = _governance_hub(scenario, pricing=greedy, table=table)
    episode = run_episode(scenario.simulation_config(), pricing, hub, scenario.horizon_hours)
    logger.info(
        f"simulated {scenario.horizon_days} days of scenario {scenario.digest} "
        f"(seed {scenario.seed}, {kind.value} pricing): {len(episode.kpi_rows)} KPI rows"
    )
    return SimulationRun(scenario, kind, episode, hub, table)


def write_run(run_dir: Union[str, Path], run: SimulationRun) -> dict[str, Path]:
    """Write the event log, frames and KPI tables (CSV and text) of ``run``."""
    run_dir = Path(run_dir)
    paths = {
        'events': write_event_log(run_dir, run.episode),
        'kpi': write_kpi_csv(run_dir / config.KPI_FILE, run.episode.kpi_rows),
        'kpi_text': run_dir / config.KPI_TEXT_FILE,
    }
    paths['kpi_text'].write_text(format_kpi_table(kpi_frame(run.episode.kpi_rows)) + "\n", encoding='utf-8')
    return paths


# ============================================================================
# PRICING
# ============================================================================

@log.log_time()
def train_pricing(scenario: ScenarioConfig, *, show_progress: bool = False) -> TrainingResult:
    return train_policy(scenario.simulation_config(), scenario.qlearn_params(), show_progress=show_progress)


def write_training(out_dir: Union[str, Path], result: TrainingResult) -> dict[str, Path]:
    out_dir = Path(out_dir)
    return {
        'qtable': write_qtable(out_dir / config.QTABLE_FILE, result.table),
        'curve': write_curve(out_dir / config.CURVE_FILE, result),
    }


def episode_margin_cents(episode: EpisodeLog) -> int:
    """Fuel margin (revenue minus wholesale cost) of a whole episode."""
    return sum(record.margin_cents for record in episode.hourly_records)


def _evaluate_seed(scenario: ScenarioConfig, table: QTable, seed: int) -> dict[str, float]:
    seeded = scenario.with_seed(seed)
    margins = {}
    for kind in (PolicyKind.GREEDY, PolicyKind.FIXED_MARGIN, PolicyKind.COMPETITOR_MATCH):
        run = simulate(seeded, kind, table=table)
        margins[kind] = episode_margin_cents(run.episode) / 100.0
    fixed = margins[PolicyKind.FIXED_MARGIN]
    return {
        'seed': seed,
        'margin_greedy': margins[PolicyKind.GREEDY],
        'margin_fixed': fixed,
        'margin_match': margins[PolicyKind.COMPETITOR_MATCH],
        'uplift_pct': 100.0 * (margins[PolicyKind.GREEDY] - fixed) / abs(fixed) if fixed else float('nan'),
    }


@log.log_time()
def bench_pricing(
    scenario: ScenarioConfig,
    seeds: Sequence[int],
    *,
    table: Optional[QTable] = None,
    workers: int = 1,
    show_progress: bool = False,
) -> pd.DataFrame:
    """Paired evaluation of the trained greedy policy against both baselines.

    The table is trained once on ``scenario`` unless given. Rows are
    ordered by seed whatever order workers finish in; a final ``mean``
    row averages every column.

    Returns:
        Columns ``seed, margin_greedy, margin_fixed, margin_match, uplift_pct``
        (margins in dollars).
    """
    if not seeds:
        raise ValueError("bench_pricing needs at least one seed")
    if table is None:
        table = train_pricing(scenario, show_progress=show_progress).table
    ordered = sorted(seeds)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_evaluate_seed, scenario, table, seed) for seed in ordered]
            rows = [future.result() for future in tqdm(futures, desc="Benchmark seeds", disable=not show_progress)]
    else:
        rows = [
            _evaluate_seed(scenario, table, seed)
            for seed in tqdm(ordered, desc="Benchmark seeds", unit="seed", disable=not show_progress)
        ]
    frame = pd.DataFrame(rows, columns=['seed', 'margin_greedy', 'margin_fixed', 'margin_match', 'uplift_pct'])
    mean = frame.drop(columns='seed').mean()
    frame['seed'] = frame['seed'].astype(str)
    frame.loc[len(frame)] = ['mean', *mean.tolist()]
    logger.info(f"pricing benchmark over {len(ordered)} seeds: mean uplift {mean['uplift_pct']:.2f}%")
    return frame


def write_uplift(out_dir: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(out_dir) / config.UPLIFT_FILE
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format='%.4f')
    return path


# ============================================================================
# FORECAST
# ============================================================================

def backtest_forecast(scenario: ScenarioConfig, *, show_progress: bool = False) -> BacktestResult:
    """Walk-forward ARX backtest on the demand of one fixed-margin episode.

    Demand is generated under the fixed-margin baseline so the series does
    not depend on a learned table.
    """
    settings = scenario.forecaster
    hub = _governance_hub(scenario, monitors=MonitorSettings(enabled=False))
    episode = run_episode(
        scenario.simulation_config(),
        baseline_policy(PolicyKind.FIXED_MARGIN),
        hub,
        scenario.horizon_hours,
        detailed=False,
    )
    demand, exo = episode_demand(episode)
    result = rolling_backtest(
        demand,
        exo,
        n_lags=settings.n_lags,
        ridge_lambda=settings.ridge_lambda,
        train_window=settings.train_window_hours,
        step=24,
        show_progress=show_progress,
    )
    logger.info(
        f"forecast backtest seed {scenario.seed}: ARX mse {result.mean_arx_mse:.3f}, "
        f"persistence mse {result.mean_persistence_mse:.3f}"
    )
    return result


def write_backtest(out_dir: Union[str, Path], result: BacktestResult) -> dict[str, Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        'backtest': out_dir / config.FORECAST_BACKTEST_FILE,
        'overlay': out_dir / config.FORECAST_OVERLAY_FILE,
    }
    result.to_frame().to_csv(paths['backtest'], index=False, float_format='%.6f')
    result.overlay_frame(OVERLAY_HOURS).to_csv(paths['overlay'], index=False, float_format='%.6f')
    return paths


# ============================================================================
# RECOMMENDER
# ============================================================================

@dataclass
class RecommenderRun:
    factors: LatentFactors
    losses: list[float]
    metrics: dict[str, float] = field(default_factory=dict)

    def metrics_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'metric': list(self.metrics), 'value': list(self.metrics.values())})


def fit_recommender(
    episode: EpisodeLog,
    settings: Optional[RecommenderSection] = None,
    *,
    show_progress: bool = False,
) -> RecommenderRun:
    """Factorize the repeat customers' baskets of ``episode`` and score a holdout.

    The holdout split and the factor initialization use the episode seed.

    Raises:
        ValueError: The episode holds no repeat-customer basket, or the
            split leaves the training or holdout set empty.
    """
    settings = settings or RecommenderSection()
    user_ids = [v.user_id for v in episode.visit_records if v.user_id >= 0]
    if not user_ids:
        raise ValueError("no repeat-customer visits in the episode; was it recorded in detail?")
    interactions = interactions_from_visits(episode.visit_records, n_users=max(user_ids) + 1)
    seed = episode.seed & MASK64
    train, holdout = split_holdout(interactions, substream(seed, Stream.HOLDOUT), settings.holdout_fraction)
    if train.n_entries == 0 or holdout.n_entries == 0:
        raise ValueError(f"holdout split left {train.n_entries} training and {holdout.n_entries} held-out entries")

    mf = settings.to_settings()
    trained = train_mf(
        train, mf.k, mf.reg_lambda, mf.learning_rate, mf.epochs, substream(seed, Stream.FACTORS),
        show_progress=show_progress,
    )
    metrics = {
        'n_users': float(interactions.n_users),
        'n_items': float(interactions.n_items),
        'n_train': float(train.n_entries),
        'n_holdout': float(holdout.n_entries),
        'final_loss': trained.losses[-1] if trained.losses else float('nan'),
        'holdout_rmse': rmse_holdout(trained.factors, holdout),
        'global_mean_rmse': global_mean_rmse(train, holdout),
        f'hit_rate_at_{settings.top_k}': hit_rate_at_k(trained.factors, train, holdout, settings.top_k),
    }
    logger.info(
        f"recommender: holdout RMSE {metrics['holdout_rmse']:.4f} "
        f"vs global mean {metrics['global_mean_rmse']:.4f}"
    )
    return RecommenderRun(trained.factors, trained.losses, metrics)


def write_recommender(out_dir: Union[str, Path], run: RecommenderRun) -> dict[str, Path]:
    out_dir = Path(out_dir)
    metrics = out_dir / config.RECOMMENDER_METRICS_FILE
    out_dir.mkdir(parents=True, exist_ok=True)
    run.metrics_frame().to_csv(metrics, index=False, float_format='%.6f')
    return {
        'factors': write_factors(out_dir / config.FACTORS_FILE, run.factors),
        'heatmap': write_heatmap(out_dir / config.HEATMAP_FILE, run.factors),
        'metrics': metrics,
    }


# ============================================================================
# INVENTORY AND SERVICE
# ============================================================================

@dataclass
class InventoryComparison:
    frame: pd.DataFrame
    wins: int
    holding_reduction_pct: float


def _holding_and_stockouts(episode: EpisodeLog) -> tuple[float, int]:
    records = episode.hourly_records
    return sum(r.holding_cents for r in records) / 100.0, sum(r.turned_away for r in records)


def compare_inventory(
    scenario: ScenarioConfig, seeds: Iterable[int], *, show_progress: bool = False
) -> InventoryComparison:
    """Forecast-driven replenishment against a weekly full-tank delivery on paired seeds.

    Both arms price with the fixed-margin baseline. A seed is a win when the
    forecast-driven arm has both fewer turned-away customers and a lower
    holding cost.
    """
    station = scenario.station_params()
    driven = scenario.inventory_policy()
    if driven.policy_kind is not InventoryPolicyKind.FORECAST_DRIVEN:
        driven = replace(driven, policy_kind=InventoryPolicyKind.FORECAST_DRIVEN)
    weekly = InventoryPolicy.fixed_weekly(station.tank_capacity, station.delivery_lead_time)
    quiet = MonitorSettings(enabled=False)

    rows = []
    for seed in tqdm(sorted(seeds), desc="Inventory seeds", unit="seed", disable=not show_progress):
        seeded = scenario.with_seed(seed)
        arms = {}
        for name, policy in (('forecast', driven), ('fixed', weekly)):
            hub = _governance_hub(seeded, inventory=policy, monitors=quiet)
            episode = run_episode(
                seeded.simulation_config(),
                baseline_policy(PolicyKind.FIXED_MARGIN),
                hub,
                seeded.horizon_hours,
                detailed=False,
            )
            arms[name] = _holding_and_stockouts(episode)
        (hold_f, out_f), (hold_x, out_x) = arms['forecast'], arms['fixed']
        rows.append({
            'seed': seed,
            'stockouts_forecast': out_f,
            'stockouts_fixed': out_x,
            'holding_forecast': hold_f,
            'holding_fixed': hold_x,
            'forecast_wins': bool(out_f < out_x and hold_f < hold_x),
        })
    frame = pd.DataFrame(rows)
    if frame.empty:
        raise ValueError("compare_inventory needs at least one seed")
    total_fixed = frame['holding_fixed'].sum()
    reduction = 100.0 * (1.0 - frame['holding_forecast'].sum() / total_fixed) if total_fixed else 0.0
    wins = int(frame['forecast_wins'].sum())
    logger.info(f"inventory comparison: forecast-driven wins {wins}/{len(frame)}, holding cost -{reduction:.1f}%")
    return InventoryComparison(frame, wins, reduction)


def _fault_active_hours(faults: Sequence[FaultInjection], bookings: Sequence[Booking], horizon: int) -> int:
    total = 0
    for fault in faults:
        if fault.start_hour >= horizon:
            continue
        repaired = [] if fault.kind is FaultKind.FRAUD else [
            b.start_hour for b in bookings
            if b.start_hour > fault.start_hour and b.alert.kind is not AlertKind.FRAUD
            and fault.targets(b.alert.asset_id)
        ]
        end = min(repaired) if repaired else horizon
        total += end - fault.start_hour
    return total


def service_effect(scenario: ScenarioConfig, seeds: Iterable[int], *, show_progress: bool = False) -> pd.DataFrame:
    """Fault exposure with and without alert-driven maintenance.

    Uses the scenario's faults, or :data:`DEFAULT_SERVICE_FAULTS` when it
    has none. Fault-active hours run from injection to the first repair of
    the fault's asset (or the end of the episode).
    """
    rows = []
    for seed in tqdm(sorted(seeds), desc="Service seeds", unit="seed", disable=not show_progress):
        seeded = scenario.with_seed(seed)
        sim_config = seeded.simulation_config()
        if not sim_config.faults:
            sim_config = replace(sim_config, faults=DEFAULT_SERVICE_FAULTS)
        for enabled in (True, False):
            hub = _governance_hub(seeded, service_enabled=enabled)
            episode = run_episode(sim_config, baseline_policy(PolicyKind.FIXED_MARGIN), hub, seeded.horizon_hours)
            records = episode.hourly_records
            rows.append({
                'seed': seed,
                'service': 'on' if enabled else 'off',
                'fault_active_hours': _fault_active_hours(sim_config.faults, hub.bookings, episode.n_hours),
                'leaked_gallons': sum(r.leak_mgal for r in records) / MGAL_PER_GALLON,
                'alerts': sum(len(r.alerts) for r in records),
                'repairs': len(hub.bookings),
            })
    frame = pd.DataFrame(rows)
    if not frame.empty:
        means = frame.groupby('service')[['fault_active_hours', 'leaked_gallons']].mean()
        logger.info(
            "service effect: fault-active hours "
            f"{means.loc['on', 'fault_active_hours']:.1f} with service, "
            f"{means.loc['off', 'fault_active_hours']:.1f} without"
        )
    return frame


def write_frame(path: Union[str, Path], frame: pd.DataFrame) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format='%.4f')
    return path


def seed_range(count: int, first: int = 1) -> list[int]:
    """``count`` consecutive seeds starting at ``first``."""
    if count < 1:
        raise ValueError(f"need at least one seed, got {count}")
    return list(range(first, first + count))
