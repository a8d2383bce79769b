"""Small parametric heads mapping features to bounded positive variances.

The head is a single bias-free linear map followed by feature-wise average
pooling and a scaled logistic, so every prediction lies strictly inside
(sigma_min, sigma_max). Two variants: ``per_token`` consumes one feature
vector at a time, ``pairwise`` consumes the concatenation of a column pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alignment import compose_variance
from .types import Sequence, VarianceField

VARIANTS = ("per_token", "pairwise")

SAVE_HEADER = "udtw-sigmanet v1"

__all__ = [
    "UncertaintyModel",
    "init_uncertainty_model",
    "predict_token_variance",
    "predict_pairwise_variance",
    "model_grad",
    "save_model",
    "load_model",
    "resolve_variance_field",
]


@dataclass
class UncertaintyModel:
    """Weights and output range of the variance head."""

    weights: np.ndarray  # d_in x d_hidden
    variant: str = "per_token"
    sigma_min: float = 0.1
    sigma_max: float = 10.0

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ValueError("weights must be a d_in x d_hidden matrix")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("weights must be finite")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        if not (0 < self.sigma_min < self.sigma_max):
            raise ValueError("need 0 < sigma_min < sigma_max")

    @property
    def d_in(self) -> int:
        return self.weights.shape[0]

    @property
    def d_hidden(self) -> int:
        return self.weights.shape[1]


def init_uncertainty_model(
    d_in: int,
    d_hidden: int | None = None,
    variant: str = "per_token",
    sigma_min: float = 0.1,
    sigma_max: float = 10.0,
    seed: int | None = None,
) -> UncertaintyModel:
    """Uniform init in [-1/sqrt(d_in), 1/sqrt(d_in)]; hidden width defaults to d_in."""
    if d_hidden is None:
        d_hidden = d_in
    rng = np.random.default_rng(seed)
    bound = 1.0 / np.sqrt(d_in)
    w = rng.uniform(-bound, bound, size=(d_in, d_hidden))
    return UncertaintyModel(w, variant=variant, sigma_min=sigma_min, sigma_max=sigma_max)


def _logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _pooled_logit(model: UncertaintyModel, x: np.ndarray) -> np.ndarray:
    """z per column of x: hidden activations averaged feature-wise."""
    return (model.weights.T @ x).mean(axis=0)


def _scale(model: UncertaintyModel, z: np.ndarray) -> np.ndarray:
    return model.sigma_min + (model.sigma_max - model.sigma_min) * _logistic(z)


def predict_token_variance(model: UncertaintyModel, s: Sequence) -> np.ndarray:
    """Per-timestep variances for a sequence, length tau."""
    if model.variant != "per_token":
        raise ValueError("model variant must be per_token")
    if model.d_in != s.dim:
        raise ValueError(f"model expects d_in={model.d_in}, sequence has d={s.dim}")
    return _scale(model, _pooled_logit(model, s.values))


def predict_pairwise_variance(
    model: UncertaintyModel, a: Sequence, b: Sequence
) -> VarianceField:
    """Jointly predicted variance for every column pair (tau x tau')."""
    if model.variant != "pairwise":
        raise ValueError("model variant must be pairwise")
    if a.dim != b.dim:
        raise ValueError("sequences must share the feature dimension")
    if model.d_in != 2 * a.dim:
        raise ValueError(
            f"pairwise model expects d_in={2 * a.dim} (concatenated pair), got {model.d_in}"
        )
    # z for the concatenation [x_m; x'_n] splits into the two half-blocks
    wa = model.weights[: a.dim]
    wb = model.weights[a.dim :]
    za = (wa.T @ a.values).mean(axis=0)
    zb = (wb.T @ b.values).mean(axis=0)
    z = za[:, None] + zb[None, :]
    return VarianceField(_scale(model, z), mode="joint_pairwise")


def model_grad(
    model: UncertaintyModel,
    upstream: np.ndarray,
    s: Sequence,
    b: Sequence | None = None,
) -> np.ndarray:
    """Chain an upstream d loss/d variance through the head, onto the weights.

    ``per_token``: upstream has length tau and ``s`` is the sequence.
    ``pairwise``: upstream is tau x tau' and ``b`` supplies the second columns.
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    span = model.sigma_max - model.sigma_min
    if model.variant == "per_token":
        if b is not None:
            raise ValueError("per_token grad takes a single sequence")
        if upstream.shape != (s.length,):
            raise ValueError(f"upstream must have shape ({s.length},)")
        z = _pooled_logit(model, s.values)
        sig = _logistic(z)
        factor = upstream * span * sig * (1.0 - sig) / model.d_hidden
        # z is the hidden-unit mean, so every hidden column carries the same grad
        return np.outer(s.values @ factor, np.ones(model.d_hidden))
    if b is None:
        raise ValueError("pairwise grad needs both sequences")
    if upstream.shape != (s.length, b.length):
        raise ValueError(f"upstream must have shape ({s.length}, {b.length})")
    wa = model.weights[: s.dim]
    wb = model.weights[s.dim :]
    za = (wa.T @ s.values).mean(axis=0)
    zb = (wb.T @ b.values).mean(axis=0)
    sig = _logistic(za[:, None] + zb[None, :])
    factor = upstream * span * sig * (1.0 - sig) / model.d_hidden
    grad_a = s.values @ factor.sum(axis=1)
    grad_b = b.values @ factor.sum(axis=0)
    grad = np.concatenate([grad_a, grad_b])
    return np.outer(grad, np.ones(model.d_hidden))


def token_variance_input_grad(
    model: UncertaintyModel, upstream: np.ndarray, s: Sequence
) -> np.ndarray:
    """d loss/d sequence values through the per-token variance prediction."""
    if model.variant != "per_token":
        raise ValueError("input grad is defined for the per_token variant")
    upstream = np.asarray(upstream, dtype=np.float64)
    z = _pooled_logit(model, s.values)
    sig = _logistic(z)
    span = model.sigma_max - model.sigma_min
    dz = upstream * span * sig * (1.0 - sig)
    # z = mean_h (W^T x) => dz/dx = row-mean of W
    return np.outer(model.weights.mean(axis=1), dz)


def save_model(model: UncertaintyModel, path: str | Path) -> None:
    """Flat text format: header, metadata/dimension line, row-major weights."""
    lines = [SAVE_HEADER]
    lines.append(
        f"{model.variant} {model.d_in} {model.d_hidden} "
        f"{model.sigma_min:.17g} {model.sigma_max:.17g}"
    )
    for row in model.weights:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def load_model(path: str | Path) -> UncertaintyModel:
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0].strip() != SAVE_HEADER:
        raise ValueError(f"not a sigmanet parameter file: {path}")
    fields = text[1].split()
    if len(fields) != 5:
        raise ValueError("malformed dimension line in sigmanet file")
    variant, d_in, d_hidden = fields[0], int(fields[1]), int(fields[2])
    sigma_min, sigma_max = float(fields[3]), float(fields[4])
    rows = [np.fromstring(line, sep=" ") for line in text[2:] if line.strip()]
    weights = np.vstack(rows)
    if weights.shape != (d_in, d_hidden):
        raise ValueError(
            f"weight block is {weights.shape}, header declares {(d_in, d_hidden)}"
        )
    return UncertaintyModel(weights, variant=variant, sigma_min=sigma_min, sigma_max=sigma_max)


def resolve_variance_field(a: Sequence, b: Sequence, variances) -> VarianceField:
    """Build the variance field for a pair from whatever the caller supplied.

    Accepts None (unit), an existing field, an UncertaintyModel (either
    variant), a (sa, sb) pair of per-token vectors, or a callable(a, b).
    """
    if variances is None:
        return VarianceField.unit((a.length, b.length))
    if isinstance(variances, VarianceField):
        if variances.shape != (a.length, b.length):
            raise ValueError(
                f"variance field shape {variances.shape} does not match "
                f"pair ({a.length}, {b.length})"
            )
        return variances
    if isinstance(variances, UncertaintyModel):
        if variances.variant == "per_token":
            return compose_variance(
                predict_token_variance(variances, a),
                predict_token_variance(variances, b),
            )
        return predict_pairwise_variance(variances, a, b)
    if isinstance(variances, tuple) and len(variances) == 2:
        return compose_variance(np.asarray(variances[0]), np.asarray(variances[1]))
    if callable(variances):
        return variances(a, b)
    raise ValueError(f"cannot interpret variance specification {type(variances)!r}")
