"""Uncertainty-weighted soft dynamic time warping.

Probabilistic alignment of ordered feature sequences: pairwise costs are
precision-weighted by per-correspondence variances, alignment paths carry
a Gibbs distribution, and both the expected path cost and the expected
log-variance regularizer are differentiable. On top of the alignment core
the package provides variance predictors, Frechet means, classification,
forecasting, episodic losses, and dictionary coding, plus a CLI and a
small HTTP service.
"""

__version__ = "0.1.0"

from .alignment import (
    align,
    compose_variance,
    hard_dtw,
    pairwise_cost,
    softming,
    softminsel,
    udtw_evaluate,
)
from .barycenter import FrechetConfig, FrechetResult, frechet_mean
from .gradients import udtw_grad, udtw_grad_sequence
from .oracle import delannoy_number, enumerate_paths, udtw_bruteforce
from .types import (
    AlignmentOutcome,
    AlignmentPath,
    CostMatrix,
    GibbsParams,
    LabeledSet,
    PathDistribution,
    Sequence,
    VarianceField,
)
from .uncertainty import (
    UncertaintyModel,
    init_uncertainty_model,
    predict_pairwise_variance,
    predict_token_variance,
)

__all__ = [
    "__version__",
    "Sequence",
    "CostMatrix",
    "VarianceField",
    "GibbsParams",
    "AlignmentPath",
    "AlignmentOutcome",
    "PathDistribution",
    "LabeledSet",
    "pairwise_cost",
    "compose_variance",
    "softming",
    "softminsel",
    "udtw_evaluate",
    "hard_dtw",
    "align",
    "delannoy_number",
    "enumerate_paths",
    "udtw_bruteforce",
    "udtw_grad",
    "udtw_grad_sequence",
    "UncertaintyModel",
    "init_uncertainty_model",
    "predict_token_variance",
    "predict_pairwise_variance",
    "FrechetConfig",
    "FrechetResult",
    "frechet_mean",
]
