"""Tests for the sparse interaction matrix and holdout split."""

import math

import numpy as np
import pytest

from scripts.recommender.interactions import (
    InteractionMatrix,
    global_mean_rmse,
    interactions_from_visits,
    split_holdout,
)
from scripts.sim.demand import CustomerVisit, VisitKind
from scripts.sim.rng import Rng64


def _shop_visit(user_id: int, basket: tuple[int, ...]) -> CustomerVisit:
    return CustomerVisit(
        hour=0, offset_s=0, user_id=user_id, dispenser=0, gallons_mgal=0, price_mills=3000,
        basket=basket, checkout_ms=1000, kind=VisitKind.SHOP,
    )


class TestInteractionMatrix:
    def test_entries_are_sorted(self):
        matrix = InteractionMatrix.from_entries(3, 4, [(2, 1, 1.0), (0, 3, 2.0), (0, 1, 0.5)])
        assert matrix.entries() == [(0, 1, 0.5), (0, 3, 2.0), (2, 1, 1.0)]
        assert matrix.n_entries == 3
        assert matrix.items_of(0) == {1, 3}
        assert matrix.items_of(1) == set()

    def test_from_dense_with_mask(self):
        dense = np.array([[1.0, 2.0], [3.0, 4.0]])
        matrix = InteractionMatrix.from_dense(dense, observed=[[True, False], [False, True]])
        assert matrix.entries() == [(0, 0, 1.0), (1, 1, 4.0)]
        assert InteractionMatrix.from_dense(dense).n_entries == 4

    def test_duplicate_pair_rejected(self):
        with pytest.raises(ValueError):
            InteractionMatrix.from_entries(2, 2, [(0, 0, 1.0), (0, 0, 2.0)])

    def test_out_of_range_index_rejected(self):
        with pytest.raises(IndexError):
            InteractionMatrix.from_entries(2, 2, [(2, 0, 1.0)])
        with pytest.raises(IndexError):
            InteractionMatrix.from_entries(2, 2, [(0, -1, 1.0)])

    def test_negative_rating_rejected(self):
        with pytest.raises(ValueError):
            InteractionMatrix.from_entries(2, 2, [(0, 0, -1.0)])

    def test_empty_matrix_is_allowed(self):
        assert InteractionMatrix.from_entries(2, 2, []).n_entries == 0


def test_ratings_are_log_purchase_counts():
    visits = [
        _shop_visit(0, (3, 3, 5)),
        _shop_visit(0, (3,)),
        _shop_visit(1, (5,)),
        _shop_visit(-1, (7,)),
    ]
    matrix = interactions_from_visits(visits, n_users=2, n_items=10)
    assert matrix.entries() == [(0, 3, math.log1p(3)), (0, 5, math.log1p(1)), (1, 5, math.log1p(1))]


class TestSplit:
    def test_split_partitions_the_entries(self):
        dense = np.arange(1.0, 101.0).reshape(10, 10)
        matrix = InteractionMatrix.from_dense(dense)
        train, holdout = split_holdout(matrix, Rng64(8), fraction=0.2)
        assert train.n_entries + holdout.n_entries == 100
        assert sorted(train.entries() + holdout.entries()) == matrix.entries()
        assert 5 <= holdout.n_entries <= 40

    def test_split_is_deterministic(self):
        matrix = InteractionMatrix.from_dense(np.ones((5, 5)))
        first = split_holdout(matrix, Rng64(2))
        second = split_holdout(matrix, Rng64(2))
        assert first[1].entries() == second[1].entries()

    @pytest.mark.parametrize('fraction', [0.0, 1.0])
    def test_bad_fraction_rejected(self, fraction):
        with pytest.raises(ValueError):
            split_holdout(InteractionMatrix.from_dense(np.ones((2, 2))), Rng64(1), fraction)


def test_global_mean_baseline():
    train = InteractionMatrix.from_entries(2, 2, [(0, 0, 1.0), (1, 1, 3.0)])
    assert global_mean_rmse(train, [(0, 1, 4.0), (1, 0, 0.0)]) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        global_mean_rmse(train, [])
