"""Tests for the reorder point, forecaster and ordering rule."""

import numpy as np
import pytest

from scripts.errors import ConfigError
from scripts.forecast.arx import build_features, predict_rows
from scripts.forecast.backtest import rolling_backtest
from scripts.governance.inventory import (
    DemandForecaster,
    DemandHistory,
    ForecasterSettings,
    InventoryPolicy,
    InventoryPolicyKind,
    inventory_decision,
    reorder_point,
    seasonal_profile,
)


def _flat_history(synthetic_exo, hours: int = 48, gallons: float = 100.0) -> DemandHistory:
    return DemandHistory(sales=[gallons] * hours, exo=synthetic_exo(hours))


def _seasonal_forecaster() -> DemandForecaster:
    return DemandForecaster(ForecasterSettings(enabled=False))


class TestReorderPoint:
    def test_lead_time_demand_plus_safety_stock(self):
        assert reorder_point(5000.0, 300.0, 1.64) == pytest.approx(5492.0)

    def test_no_uncertainty(self):
        assert reorder_point(800.0, 0.0, 1.64) == 800.0

    @pytest.mark.parametrize('args', [(-1.0, 0.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, -1.0)])
    def test_negative_inputs_rejected(self, args):
        with pytest.raises(ValueError):
            reorder_point(*args)


class TestSeasonalProfile:
    def test_hour_of_day_means(self, synthetic_exo):
        exo = synthetic_exo(48)
        sales = [float(e.hour_of_day) for e in exo]
        path, sd = seasonal_profile(DemandHistory(sales, exo), 5)
        np.testing.assert_array_equal(path, [0.0, 1.0, 2.0, 3.0, 4.0])
        assert sd == 0.0

    def test_empty_history(self):
        path, sd = seasonal_profile(DemandHistory(), 3)
        assert path.tolist() == [0.0, 0.0, 0.0]
        assert sd == 0.0

    def test_unseen_hours_use_the_overall_mean(self, synthetic_exo):
        exo = synthetic_exo(2)
        path, _ = seasonal_profile(DemandHistory([10.0, 20.0], exo), 3)
        assert path.tolist() == [15.0, 15.0, 15.0]


class TestDecision:
    def test_order_below_the_reorder_point(self, synthetic_exo):
        policy = InventoryPolicy(lead_time=8, order_up_to=8000.0)
        quantity = inventory_decision(700_000, 0, policy, _seasonal_forecaster(), _flat_history(synthetic_exo))
        assert quantity == 8_000_000 - 700_000

    def test_no_order_above_the_reorder_point(self, synthetic_exo):
        policy = InventoryPolicy(lead_time=8)
        assert inventory_decision(900_000, 0, policy, _seasonal_forecaster(), _flat_history(synthetic_exo)) is None

    def test_empty_tank_orders_up_to_target(self, synthetic_exo):
        policy = InventoryPolicy()
        quantity = inventory_decision(0, 0, policy, _seasonal_forecaster(), _flat_history(synthetic_exo))
        assert quantity == policy.order_up_to_mgal == 8_000_000

    def test_pending_order_blocks_a_new_one(self, synthetic_exo):
        policy = InventoryPolicy()
        assert inventory_decision(0, 1, policy, _seasonal_forecaster(), _flat_history(synthetic_exo)) is None

    def test_fixed_schedule(self, synthetic_exo):
        policy = InventoryPolicy.fixed_weekly(tank_capacity=20000.0)
        assert policy.policy_kind is InventoryPolicyKind.FIXED_SCHEDULE
        forecaster = _seasonal_forecaster()
        assert inventory_decision(5_000_000, 0, policy, forecaster, _flat_history(synthetic_exo, 1)) == 15_000_000
        assert inventory_decision(5_000_000, 0, policy, forecaster, _flat_history(synthetic_exo, 2)) is None
        assert inventory_decision(5_000_000, 0, policy, forecaster, _flat_history(synthetic_exo, 169)) == 15_000_000
        assert inventory_decision(20_000_000, 0, policy, forecaster, _flat_history(synthetic_exo, 1)) is None


class TestForecaster:
    def _settings(self) -> ForecasterSettings:
        return ForecasterSettings(n_lags=2, ridge_lambda=1e-3, train_window_hours=168)

    def test_refit_needs_a_full_window(self, synthetic_exo):
        forecaster = DemandForecaster(self._settings())
        assert forecaster.required_history == 170
        assert not forecaster.refresh(_flat_history(synthetic_exo, 169))
        assert forecaster.model is None

    def test_refit_then_forecast(self, synthetic_exo):
        forecaster = DemandForecaster(self._settings())
        history = _flat_history(synthetic_exo, 200, gallons=50.0)
        assert forecaster.refresh(history)
        path, sd = forecaster.forecast(history, 6)
        np.testing.assert_allclose(path, 50.0, atol=1e-3)
        assert sd == pytest.approx(0.0, abs=1e-3)
        demand, sigma = forecaster.lead_time_demand(history, 4)
        assert demand == pytest.approx(200.0, abs=1e-2)

    def test_sigma_comes_from_backtest_errors(self, synthetic_exo):
        settings = ForecasterSettings(n_lags=2, ridge_lambda=1e-3, train_window_hours=168, backtest_hours=48)
        rng = np.random.default_rng(3)
        history = DemandHistory(sales=list(100.0 + 10.0 * rng.standard_normal(250)), exo=synthetic_exo(250))
        forecaster = DemandForecaster(settings)
        assert forecaster.refresh(history)
        result = rolling_backtest(history.sales[-218:], history.exo[-218:], 2, 1e-3, 168)
        errors = np.asarray(result.actual) - np.asarray(result.arx_predicted)
        assert errors.size == 48
        assert forecaster.residual_sd == pytest.approx(float(np.std(errors)), rel=1e-12)
        _, sigma = forecaster.lead_time_demand(history, 4)
        assert sigma == pytest.approx(forecaster.residual_sd * 2.0, rel=1e-12)

    def test_in_sample_sigma_before_any_backtest_hour(self, synthetic_exo):
        rng = np.random.default_rng(4)
        history = DemandHistory(sales=list(100.0 + 10.0 * rng.standard_normal(170)), exo=synthetic_exo(170))
        forecaster = DemandForecaster(self._settings())
        assert forecaster.refresh(history)
        features, targets = build_features(history.sales, history.exo, 2)
        residuals = targets - predict_rows(forecaster.model, features)
        assert forecaster.residual_sd == pytest.approx(float(np.std(residuals)), rel=1e-12)

    def test_disabled_forecaster_never_fits(self, synthetic_exo):
        forecaster = DemandForecaster(ForecasterSettings(enabled=False))
        assert not forecaster.refresh(_flat_history(synthetic_exo, 2000))


class TestPolicyValidation:
    @pytest.mark.parametrize(
        'overrides, field',
        [
            ({'order_up_to': 30000.0}, 'inventory.order_up_to'),
            ({'order_up_to': 0.0}, 'inventory.order_up_to'),
            ({'service_level_z': -1.0}, 'inventory.service_level_z'),
            ({'lead_time': 0}, 'inventory.lead_time'),
            ({'fixed_interval': 0}, 'inventory.fixed_interval'),
        ],
    )
    def test_invalid_policy(self, overrides, field):
        with pytest.raises(ConfigError) as excinfo:
            InventoryPolicy(**overrides).validate(tank_capacity=20000.0)
        assert excinfo.value.field == field

    def test_default_policy_is_valid(self):
        InventoryPolicy().validate(tank_capacity=20000.0)
