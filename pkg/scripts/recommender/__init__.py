"""Cross-sell recommendations by matrix factorization of shop baskets.

    - interactions.py: sparse log-count ratings, holdout split, mean baseline
    - factorization.py: SGD training, loss and gradient, ranking, evaluation
    - io.py: factor and heatmap CSV files
"""

from .factorization import (
    DivergenceError,
    LatentFactors,
    MfSettings,
    init_factors,
    predict_rating,
    recommend_top_k,
    rmse_holdout,
    train_mf,
)
from .interactions import InteractionMatrix, interactions_from_visits, split_holdout

__all__ = [
    'DivergenceError',
    'InteractionMatrix',
    'LatentFactors',
    'MfSettings',
    'init_factors',
    'interactions_from_visits',
    'predict_rating',
    'recommend_top_k',
    'rmse_holdout',
    'split_holdout',
    'train_mf',
]
