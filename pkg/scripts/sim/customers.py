"""Convenience-store catalog and the persistent repeat-customer population.

The catalog has 40 items in six categories. Each repeat customer carries a
stable latent preference vector; together with per-item latent vectors and
the category popularity it defines a personal item distribution, which is
what gives the recommender recoverable low-rank structure. Transient
customers buy from the plain popularity distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scripts.sim.rng import Stream, gaussians, substream

__all__ = [
    'CATEGORIES',
    'CatalogItem',
    'CATALOG',
    'N_ITEMS',
    'ITEM_PRICES_CENTS',
    'BASE_CDF',
    'CustomerPopulation',
    'build_population',
]

CATEGORIES: tuple[str, ...] = (
    'snacks', 'beverages', 'car_accessories', 'car_care', 'sundries', 'services',
)
_CATEGORY_POPULARITY = (0.28, 0.32, 0.08, 0.12, 0.12, 0.08)
_LATENT_DIM = 3

_ITEMS: dict[str, tuple[tuple[str, int], ...]] = {
    'snacks': (
        ('potato chips', 249), ('beef jerky', 699), ('candy bar', 189), ('trail mix', 399),
        ('granola bar', 159), ('pretzels', 229), ('peanuts', 199), ('gum', 149), ('cookies', 299),
    ),
    'beverages': (
        ('energy drink', 329), ('bottled water', 179), ('cola', 219), ('iced coffee', 349),
        ('sports drink', 259), ('hot coffee', 199), ('iced tea', 229), ('juice', 279), ('milk', 249),
    ),
    'car_accessories': (
        ('windshield wipers', 1899), ('phone charger', 1499), ('air freshener', 399),
        ('phone mount', 1299), ('ice scraper', 699), ('sunshade', 1599),
    ),
    'car_care': (
        ('motor oil', 899), ('washer fluid', 499), ('coolant', 1199),
        ('tire gauge', 599), ('glass cleaner', 549), ('microfiber cloth', 349),
    ),
    'sundries': (
        ('lighter', 199), ('pain reliever', 699), ('batteries', 899), ('sunglasses', 1299),
        ('lip balm', 299),
    ),
    'services': (
        ('car wash', 1200), ('vacuum', 300), ('air fill', 200), ('propane exchange', 2299),
        ('ice bag', 349),
    ),
}


@dataclass(frozen=True)
class CatalogItem:
    item_id: int
    name: str
    category: str
    price_cents: int


def _build_catalog() -> tuple[CatalogItem, ...]:
    items = []
    for category in CATEGORIES:
        for name, price in _ITEMS[category]:
            items.append(CatalogItem(len(items), name, category, price))
    return tuple(items)


CATALOG: tuple[CatalogItem, ...] = _build_catalog()
N_ITEMS = len(CATALOG)
ITEM_PRICES_CENTS = np.array([item.price_cents for item in CATALOG], dtype=np.int64)
"""Shelf price of every catalog item, indexed by item id."""


@dataclass(frozen=True, eq=False)
class CustomerPopulation:
    """Per-user cumulative item distributions.

    Attributes:
        user_cdf: ``n_users x n_items`` cumulative purchase distributions.
        base_cdf: Popularity-only cumulative distribution (transients).
    """

    user_cdf: np.ndarray
    base_cdf: np.ndarray

    @property
    def n_users(self) -> int:
        return self.user_cdf.shape[0]


def _log_popularity() -> np.ndarray:
    sizes = {c: len(_ITEMS[c]) for c in CATEGORIES}
    share = dict(zip(CATEGORIES, _CATEGORY_POPULARITY))
    return np.array([math.log(share[item.category] / sizes[item.category]) for item in CATALOG])


def _cdf(logits: np.ndarray) -> np.ndarray:
    weights = np.exp(logits - logits.max(axis=-1, keepdims=True))
    cdf = np.cumsum(weights / weights.sum(axis=-1, keepdims=True), axis=-1)
    cdf[..., -1] = 1.0
    return cdf


def build_population(seed: int, n_users: int) -> CustomerPopulation:
    """Stable preference structure for ``n_users`` repeat customers."""
    rng = substream(seed, Stream.POPULATION)
    _, g = gaussians(rng, (n_users + N_ITEMS) * _LATENT_DIM)
    users = g[: n_users * _LATENT_DIM].reshape(n_users, _LATENT_DIM)
    items = g[n_users * _LATENT_DIM:].reshape(N_ITEMS, _LATENT_DIM)
    log_pop = _log_popularity()
    return CustomerPopulation(
        user_cdf=_cdf(log_pop[None, :] + users @ items.T),
        base_cdf=BASE_CDF,
    )


BASE_CDF: np.ndarray = _cdf(_log_popularity())
"""Popularity-only item distribution used for transient customers."""
