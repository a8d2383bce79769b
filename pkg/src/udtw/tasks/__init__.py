"""Downstream procedures built on the alignment core."""

from .classify import (
    centroid_classify,
    fit_class_centroids,
    knn_classify,
    pair_score,
    score_matrix,
)
from .coding import (
    Dictionary,
    atoms_from_samples,
    dict_update,
    hik_score,
    lcsa_code,
    reconstruction_distance,
)
from .episodic import ContrastiveConfig, Episode, episodic_supervised_loss, infonce_loss
from .forecast import (
    ForecastModel,
    forecast_mse,
    forecast_predict,
    forecast_train,
    init_forecast_model,
    split_series,
)

__all__ = [
    "pair_score",
    "score_matrix",
    "knn_classify",
    "centroid_classify",
    "fit_class_centroids",
    "ForecastModel",
    "init_forecast_model",
    "split_series",
    "forecast_predict",
    "forecast_train",
    "forecast_mse",
    "Episode",
    "ContrastiveConfig",
    "episodic_supervised_loss",
    "infonce_loss",
    "Dictionary",
    "atoms_from_samples",
    "lcsa_code",
    "reconstruction_distance",
    "dict_update",
    "hik_score",
]
