"""Matrix factorization by stochastic gradient descent.

Ratings are approximated as ``R[i, j] ~ U[i] . V[j]``. Training minimizes

    sum over observed (i, j) of (r_ij - U[i] . V[j])^2
        + reg_lambda * (sum_i ||U[i]||^2 + sum_j ||V[j]||^2)

with one update per observed entry, visited in a seeded shuffled order
each epoch:

    e = r_ij - U[i] . V[j]
    U[i] += lr * (e * V[j] - reg_lambda * U[i])
    V[j] += lr * (e * U[i] - reg_lambda * V[j])

Both updates use the factors from before the step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from tqdm import tqdm

from scripts.recommender.interactions import InteractionMatrix
from scripts.sim.rng import Rng64, uniforms
from scripts.utils import logging_system as log

__all__ = [
    'DivergenceError',
    'LatentFactors',
    'MfSettings',
    'TrainedFactors',
    'init_factors',
    'predict_rating',
    'predict_matrix',
    'train_mf',
    'mf_loss',
    'mf_gradient',
    'recommend_top_k',
    'rmse_holdout',
    'hit_rate_at_k',
    'INIT_SCALE',
    'DIVERGENCE_LOSS',
]

logger = log.get_logger(__name__)

INIT_SCALE = 0.1
DIVERGENCE_LOSS = 1e12
MAX_ROW_NORM = 100.0


class DivergenceError(RuntimeError):
    """Training loss became non-finite or exceeded :data:`DIVERGENCE_LOSS`."""

    def __init__(self, epoch: int, loss: float) -> None:
        super().__init__(f"matrix factorization diverged at epoch {epoch}: loss {loss:.3e}")
        self.epoch = epoch
        self.loss = loss


@dataclass(frozen=True, eq=False)
class LatentFactors:
    """User factors ``U`` (n_users x k) and item factors ``V`` (n_items x k)."""

    U: np.ndarray
    V: np.ndarray
    reg_lambda: float = 0.0

    def __post_init__(self) -> None:
        if self.U.ndim != 2 or self.V.ndim != 2 or self.U.shape[1] != self.V.shape[1]:
            raise ValueError(f"factor shapes {self.U.shape} and {self.V.shape} do not share a latent dimension")
        if self.U.shape[1] < 1:
            raise ValueError("latent dimension must be >= 1")
        if self.reg_lambda < 0:
            raise ValueError(f"reg_lambda must be >= 0, got {self.reg_lambda}")

    @property
    def k(self) -> int:
        return self.U.shape[1]

    @property
    def n_users(self) -> int:
        return self.U.shape[0]

    @property
    def n_items(self) -> int:
        return self.V.shape[0]

    def copy(self) -> LatentFactors:
        return LatentFactors(self.U.copy(), self.V.copy(), self.reg_lambda)


@dataclass(frozen=True)
class MfSettings:
    """Training hyperparameters."""

    k: int = 8
    reg_lambda: float = 0.05
    learning_rate: float = 0.01
    epochs: int = 200


@dataclass
class TrainedFactors:
    factors: LatentFactors
    losses: list[float] = field(default_factory=list)


def _draw_factors(n_users: int, n_items: int, k: int, rng: Rng64) -> tuple[LatentFactors, Rng64]:
    if n_users < 1 or n_items < 1 or k < 1:
        raise ValueError(f"dimensions must be >= 1, got n_users={n_users}, n_items={n_items}, k={k}")
    rng, draws = uniforms(rng, (n_users + n_items) * k)
    values = INIT_SCALE * (2.0 * draws - 1.0)
    U = values[: n_users * k].reshape(n_users, k)
    V = values[n_users * k:].reshape(n_items, k)
    return LatentFactors(U, V), rng


def init_factors(n_users: int, n_items: int, k: int, rng: Rng64) -> LatentFactors:
    """Factors with entries uniform in ``[-0.1, 0.1]``."""
    factors, _ = _draw_factors(n_users, n_items, k, rng)
    return factors


def predict_rating(factors: LatentFactors, user: int, item: int) -> float:
    if not 0 <= user < factors.n_users:
        raise IndexError(f"user {user} out of range [0, {factors.n_users})")
    if not 0 <= item < factors.n_items:
        raise IndexError(f"item {item} out of range [0, {factors.n_items})")
    return float(factors.U[user] @ factors.V[item])


def predict_matrix(factors: LatentFactors) -> np.ndarray:
    """Full ``n_users x n_items`` prediction grid."""
    return factors.U @ factors.V.T


def mf_loss(factors: LatentFactors, interactions: InteractionMatrix, reg_lambda: Optional[float] = None) -> float:
    """Training objective over the observed entries."""
    lam = factors.reg_lambda if reg_lambda is None else reg_lambda
    predicted = np.einsum('ij,ij->i', factors.U[interactions.users], factors.V[interactions.items])
    errors = interactions.ratings - predicted
    return float(errors @ errors + lam * (np.sum(factors.U ** 2) + np.sum(factors.V ** 2)))


def mf_gradient(
    factors: LatentFactors, interactions: InteractionMatrix, reg_lambda: Optional[float] = None
) -> tuple[np.ndarray, np.ndarray]:
    """Full-batch gradient of :func:`mf_loss` with respect to ``U`` and ``V``."""
    lam = factors.reg_lambda if reg_lambda is None else reg_lambda
    U, V = factors.U, factors.V
    predicted = np.einsum('ij,ij->i', U[interactions.users], V[interactions.items])
    errors = interactions.ratings - predicted
    grad_u = 2.0 * lam * U
    grad_v = 2.0 * lam * V
    np.add.at(grad_u, interactions.users, -2.0 * errors[:, None] * V[interactions.items])
    np.add.at(grad_v, interactions.items, -2.0 * errors[:, None] * U[interactions.users])
    return grad_u, grad_v


def _shuffled(rng: Rng64, n: int) -> tuple[Rng64, np.ndarray]:
    rng, keys = uniforms(rng, n)
    return rng, np.argsort(keys, kind='stable')


def train_mf(
    interactions: InteractionMatrix,
    k: int,
    reg_lambda: float,
    learning_rate: float,
    epochs: int,
    rng: Rng64,
    *,
    initial: Optional[LatentFactors] = None,
    show_progress: bool = False,
) -> TrainedFactors:
    """Fit latent factors by per-entry SGD.

    Factors are drawn from ``rng`` (unless ``initial`` is given); the
    per-epoch shuffles continue the same stream.

    Returns:
        The factors and the training loss after each epoch.

    Raises:
        ValueError: No observed entry, or invalid hyperparameters.
        DivergenceError: The loss became non-finite or exceeded 1e12.
    """
    if interactions.n_entries == 0:
        raise ValueError("train_mf needs at least one observed entry")
    if reg_lambda < 0 or learning_rate <= 0 or epochs < 0:
        raise ValueError(
            f"invalid hyperparameters: reg_lambda={reg_lambda}, learning_rate={learning_rate}, epochs={epochs}"
        )
    factors, rng = _draw_factors(interactions.n_users, interactions.n_items, k, rng)
    if initial is not None:
        factors = initial
    U = factors.U.copy()
    V = factors.V.copy()
    users = interactions.users
    items = interactions.items
    ratings = interactions.ratings
    losses: list[float] = []

    for epoch in tqdm(range(epochs), desc="MF epochs", unit="epoch", disable=not show_progress):
        rng, order = _shuffled(rng, len(ratings))
        for index in order:
            i = users[index]
            j = items[index]
            u = U[i].copy()
            v = V[j]
            error = ratings[index] - u @ v
            U[i] += learning_rate * (error * v - reg_lambda * u)
            V[j] += learning_rate * (error * u - reg_lambda * v)
        loss = mf_loss(LatentFactors(U, V), interactions, reg_lambda)
        if not math.isfinite(loss) or loss > DIVERGENCE_LOSS:
            raise DivergenceError(epoch, loss)
        losses.append(loss)

    norms = np.linalg.norm(U, axis=1)
    if norms.size and norms.max() > MAX_ROW_NORM:
        logger.warning(f"largest user factor norm {norms.max():.1f} exceeds {MAX_ROW_NORM}")
    if losses:
        logger.debug(f"MF trained k={k} for {epochs} epochs: final loss {losses[-1]:.6f}")
    return TrainedFactors(LatentFactors(U, V, reg_lambda), losses)


def recommend_top_k(
    factors: LatentFactors, user: int, k_items: int, exclude: Iterable[int] = ()
) -> list[int]:
    """Best-scoring items not in ``exclude``; ties go to the lower item index."""
    if not 0 <= user < factors.n_users:
        raise IndexError(f"user {user} out of range [0, {factors.n_users})")
    scores = factors.V @ factors.U[user]
    excluded = set(exclude)
    eligible = np.array([j for j in range(factors.n_items) if j not in excluded], dtype=np.int64)
    if eligible.size == 0 or k_items <= 0:
        return []
    order = np.lexsort((eligible, -scores[eligible]))
    return eligible[order[:k_items]].tolist()


def rmse_holdout(factors: LatentFactors, holdout: InteractionMatrix | Sequence[tuple[int, int, float]]) -> float:
    """Root mean squared error over held-out entries.

    Raises:
        ValueError: ``holdout`` is empty.
    """
    if isinstance(holdout, InteractionMatrix):
        users, items, truth = holdout.users, holdout.items, holdout.ratings
    else:
        users = np.array([u for u, _, _ in holdout], dtype=np.int64)
        items = np.array([i for _, i, _ in holdout], dtype=np.int64)
        truth = np.array([r for _, _, r in holdout], dtype=np.float64)
    if truth.size == 0:
        raise ValueError("holdout is empty")
    predicted = np.einsum('ij,ij->i', factors.U[users], factors.V[items])
    return float(np.sqrt(np.mean((truth - predicted) ** 2)))


def hit_rate_at_k(
    factors: LatentFactors, train: InteractionMatrix, holdout: InteractionMatrix, k_items: int = 5
) -> float:
    """Fraction of holdout users with a held-out item among their top-k unseen items."""
    holdout_users = np.unique(holdout.users)
    if holdout_users.size == 0:
        raise ValueError("holdout is empty")
    hits = 0
    for user in holdout_users.tolist():
        top = set(recommend_top_k(factors, user, k_items, train.items_of(user)))
        if top & holdout.items_of(user):
            hits += 1
    return hits / holdout_users.size
