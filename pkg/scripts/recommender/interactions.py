"""Sparse user-item interactions built from shop baskets.

A rating is ``ln(1 + purchase count)``. Only observed (purchased) pairs
are stored; unobserved pairs are missing, not zero.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from scripts.sim.customers import N_ITEMS
from scripts.sim.demand import CustomerVisit
from scripts.sim.rng import Rng64, uniforms

__all__ = [
    'InteractionMatrix',
    'interactions_from_visits',
    'split_holdout',
    'global_mean_rmse',
    'DEFAULT_HOLDOUT_FRACTION',
]

DEFAULT_HOLDOUT_FRACTION = 0.2


@dataclass(frozen=True, eq=False)
class InteractionMatrix:
    """Observed ``(user, item, rating)`` triples, sorted by user then item."""

    n_users: int
    n_items: int
    users: np.ndarray
    items: np.ndarray
    ratings: np.ndarray

    def __post_init__(self) -> None:
        if self.n_users < 1 or self.n_items < 1:
            raise ValueError(f"dimensions must be >= 1, got {self.n_users} x {self.n_items}")
        if not len(self.users) == len(self.items) == len(self.ratings):
            raise ValueError("users, items and ratings differ in length")
        if len(self.users) == 0:
            return
        if self.users.min() < 0 or self.users.max() >= self.n_users:
            raise IndexError(f"user index out of range [0, {self.n_users})")
        if self.items.min() < 0 or self.items.max() >= self.n_items:
            raise IndexError(f"item index out of range [0, {self.n_items})")
        if not np.all(np.isfinite(self.ratings)) or self.ratings.min() < 0:
            raise ValueError("ratings must be finite and >= 0")
        keys = self.users.astype(np.int64) * self.n_items + self.items
        if np.unique(keys).size != keys.size:
            raise ValueError("duplicate (user, item) pairs")

    @classmethod
    def from_entries(
        cls, n_users: int, n_items: int, entries: Iterable[tuple[int, int, float]]
    ) -> InteractionMatrix:
        rows = sorted((int(u), int(i), float(r)) for u, i, r in entries)
        return cls(
            n_users,
            n_items,
            np.array([u for u, _, _ in rows], dtype=np.int64),
            np.array([i for _, i, _ in rows], dtype=np.int64),
            np.array([r for _, _, r in rows], dtype=np.float64),
        )

    @classmethod
    def from_dense(cls, matrix: np.ndarray, observed: np.ndarray | None = None) -> InteractionMatrix:
        """Entries of ``matrix`` where ``observed`` is true (all entries by default)."""
        matrix = np.asarray(matrix, dtype=np.float64)
        mask = np.ones(matrix.shape, dtype=bool) if observed is None else np.asarray(observed, dtype=bool)
        users, items = np.nonzero(mask)
        return cls(matrix.shape[0], matrix.shape[1], users.astype(np.int64), items.astype(np.int64), matrix[users, items])

    @property
    def n_entries(self) -> int:
        return len(self.ratings)

    def subset(self, mask: np.ndarray) -> InteractionMatrix:
        return InteractionMatrix(self.n_users, self.n_items, self.users[mask], self.items[mask], self.ratings[mask])

    def items_of(self, user: int) -> set[int]:
        return set(self.items[self.users == user].tolist())

    def entries(self) -> list[tuple[int, int, float]]:
        return list(zip(self.users.tolist(), self.items.tolist(), self.ratings.tolist()))


def interactions_from_visits(
    visits: Iterable[CustomerVisit], n_users: int, n_items: int = N_ITEMS
) -> InteractionMatrix:
    """Log-scaled basket purchase counts of the repeat customers."""
    counts: Counter[tuple[int, int]] = Counter()
    for visit in visits:
        if visit.user_id < 0:
            continue
        for item in visit.basket:
            counts[(visit.user_id, item)] += 1
    return InteractionMatrix.from_entries(
        n_users, n_items, ((u, i, math.log1p(c)) for (u, i), c in counts.items())
    )


def split_holdout(
    interactions: InteractionMatrix, rng: Rng64, fraction: float = DEFAULT_HOLDOUT_FRACTION
) -> tuple[InteractionMatrix, InteractionMatrix]:
    """Random train/holdout split; each entry is held out with probability ``fraction``."""
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"holdout fraction must lie in (0, 1), got {fraction}")
    _, draws = uniforms(rng, interactions.n_entries)
    held = draws < fraction
    return interactions.subset(~held), interactions.subset(held)


def global_mean_rmse(train: InteractionMatrix, holdout: Sequence[tuple[int, int, float]] | InteractionMatrix) -> float:
    """RMSE of predicting the training mean rating for every held-out entry."""
    truth = holdout.ratings if isinstance(holdout, InteractionMatrix) else np.array([r for _, _, r in holdout])
    if truth.size == 0:
        raise ValueError("holdout is empty")
    if train.n_entries == 0:
        raise ValueError("training set is empty")
    return float(np.sqrt(np.mean((truth - train.ratings.mean()) ** 2)))
