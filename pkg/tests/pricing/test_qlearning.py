"""Tests for the tabular Q-learning core."""

import itertools

import numpy as np
import pytest

from scripts.pricing.qlearning import (
    N_ACTIONS,
    PriceAction,
    QLearnParams,
    QTable,
    RewardWeights,
    epsilon_at,
    greedy_action,
    q_update,
    reward,
    select_action,
)
from scripts.sim.rng import Rng64, next_uniform


def test_action_indices():
    assert [a.index for a in PriceAction] == [0, 1, 2]
    assert PriceAction.from_index(2) is PriceAction.UP
    assert N_ACTIONS == 3


class TestReward:
    def test_weighted_sum(self):
        weights = RewardWeights(revenue=1.0, volume=0.1, retention=5.0)
        assert reward(30.0, 100.0, -0.2, weights) == pytest.approx(39.0)

    def test_wholesale_cost_turns_revenue_into_margin(self):
        weights = RewardWeights(revenue=1.0, volume=0.0, retention=0.0)
        assert reward(30.0, 10.0, 0.0, weights, wholesale_cost=27.5) == pytest.approx(2.5)

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            RewardWeights(volume=-1.0)


class TestUpdate:
    def test_full_step_without_discount_sets_reward(self):
        params = QLearnParams(alpha=1.0, gamma=0.0)
        q = q_update(QTable.zeros(), 5, 2, 3.5, 9, params)
        assert q.values[5, 2] == 3.5
        assert q.visit_counts[5, 2] == 1
        assert q.values.sum() == 3.5

    def test_update_does_not_touch_its_input(self):
        q = QTable.zeros()
        q_update(q, 0, 0, 1.0, 1, QLearnParams())
        assert q.values.sum() == 0.0
        assert q.visit_counts.sum() == 0

    def test_partial_step(self):
        values = np.zeros((2, 3))
        values[1] = [1.0, 4.0, 2.0]
        q = QTable(values, np.zeros((2, 3), dtype=np.int64))
        updated = q_update(q, 0, 1, 2.0, 1, QLearnParams(alpha=0.5, gamma=0.5))
        assert updated.values[0, 1] == pytest.approx(0.5 * (2.0 + 0.5 * 4.0))

    @pytest.mark.parametrize('s, a, s_next', [(-1, 0, 0), (72, 0, 0), (0, 3, 0), (0, 0, 72)])
    def test_out_of_range_indices_rejected(self, s, a, s_next):
        with pytest.raises(ValueError):
            q_update(QTable.zeros(), s, a, 0.0, s_next, QLearnParams())

    def test_converges_to_value_iteration_on_a_toy_problem(self):
        # two states; action 2 moves to the other state, the rest stay put
        rewards = np.array([[1.0, 0.0, 0.5], [2.0, -1.0, 0.0]])

        def successor(s: int, a: int) -> int:
            return 1 - s if a == 2 else s

        gamma = 0.8
        optimal = np.zeros((2, 3))
        for _ in range(2000):
            optimal = np.array(
                [[rewards[s, a] + gamma * optimal[successor(s, a)].max() for a in range(3)] for s in range(2)]
            )

        params = QLearnParams(alpha=0.5, gamma=gamma)
        q = QTable.zeros(2, 3)
        for _ in range(400):
            for s, a in itertools.product(range(2), range(3)):
                q = q_update(q, s, a, rewards[s, a], successor(s, a), params)
        np.testing.assert_allclose(q.values, optimal, atol=1e-6)


class TestActionSelection:
    def test_greedy_picks_the_best(self):
        assert greedy_action(np.array([[1.0, 5.0, 2.0]]), 0) == 1

    def test_greedy_ties_go_to_the_lowest_index(self):
        assert greedy_action(np.array([[3.0, 3.0, 3.0]]), 0) == 0
        assert greedy_action(np.array([[0.0, 2.0, 2.0]]), 0) == 1

    def test_no_exploration_is_greedy_and_draws_once(self):
        q = QTable.zeros(1, 3)
        q.values[0] = [0.0, 0.0, 1.0]
        rng = Rng64(17)
        action, after = select_action(q, 0, 0.0, rng)
        assert action is PriceAction.UP
        assert after == next_uniform(rng)[0]

    def test_full_exploration_is_uniform(self):
        q = QTable.zeros(1, 3)
        q.values[0] = [0.0, 9.0, 0.0]
        rng = Rng64(23)
        counts = dict.fromkeys(PriceAction, 0)
        for _ in range(3000):
            action, rng = select_action(q, 0, 1.0, rng)
            counts[action] += 1
        assert all(900 < n < 1100 for n in counts.values())

    def test_same_generator_same_choice(self):
        q = QTable.zeros()
        assert select_action(q, 3, 0.5, Rng64(4)) == select_action(q, 3, 0.5, Rng64(4))

    @pytest.mark.parametrize('epsilon', [-0.1, 1.1])
    def test_bad_epsilon_rejected(self, epsilon):
        with pytest.raises(ValueError):
            select_action(QTable.zeros(), 0, epsilon, Rng64(1))


class TestParams:
    def test_linear_epsilon_decay(self):
        params = QLearnParams(epsilon_start=0.3, epsilon_end=0.01, epsilon_decay_episodes=240)
        assert epsilon_at(params, 0) == pytest.approx(0.3)
        assert epsilon_at(params, 120) == pytest.approx(0.155)
        assert epsilon_at(params, 240) == pytest.approx(0.01)
        assert epsilon_at(params, 1000) == pytest.approx(0.01)

    def test_no_decay_uses_the_final_rate(self):
        assert epsilon_at(QLearnParams(epsilon_decay_episodes=0), 0) == 0.01

    @pytest.mark.parametrize(
        'overrides',
        [{'alpha': 0.0}, {'alpha': 1.5}, {'gamma': 1.0}, {'epsilon_start': 0.1, 'epsilon_end': 0.2},
         {'episodes': -1}, {'episode_days': 0}],
    )
    def test_invalid_settings_rejected(self, overrides):
        with pytest.raises(ValueError):
            QLearnParams(**overrides)

    def test_table_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            QTable(np.zeros((2, 3)), np.zeros((2, 2), dtype=np.int64))
