"""Forecasting the continuation of scalar series with an alignment loss.

A one-hidden-layer MLP maps the observed prefix to a predicted future; the
training loss is dist(prediction, truth) + beta * omega with detached
couplings, optionally with per-timestep variances from a jointly trained
uncertainty head.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..alignment import compose_variance, pairwise_cost, udtw_evaluate
from ..gradients import udtw_grad
from ..types import GibbsParams, Sequence, VarianceField
from ..uncertainty import (
    UncertaintyModel,
    model_grad,
    predict_token_variance,
    token_variance_input_grad,
)

__all__ = [
    "ForecastModel",
    "init_forecast_model",
    "split_series",
    "forecast_predict",
    "forecast_loss",
    "forecast_gradients",
    "forecast_train",
    "forecast_mse",
]

DIVERGENCE_LIMIT = 1e8


@dataclass
class ForecastModel:
    w1: np.ndarray  # hidden x input_length
    b1: np.ndarray
    w2: np.ndarray  # output_length x hidden
    b2: np.ndarray

    def __post_init__(self):
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(arr)):
                raise ValueError("model parameters must be finite")
        if self.w2.shape[0] < 1:
            raise ValueError("output length must be >= 1")

    @property
    def input_length(self) -> int:
        return self.w1.shape[1]

    @property
    def output_length(self) -> int:
        return self.w2.shape[0]

    @property
    def hidden_width(self) -> int:
        return self.w1.shape[0]

    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]


def init_forecast_model(
    input_length: int,
    output_length: int,
    hidden_width: int = 128,
    seed: int | None = None,
) -> ForecastModel:
    rng = np.random.default_rng(seed)
    s1 = 1.0 / np.sqrt(input_length)
    s2 = 1.0 / np.sqrt(hidden_width)
    return ForecastModel(
        w1=rng.uniform(-s1, s1, size=(hidden_width, input_length)),
        b1=np.zeros(hidden_width),
        w2=rng.uniform(-s2, s2, size=(output_length, hidden_width)),
        b2=np.zeros(output_length),
    )


def split_series(s: Sequence, input_length: int) -> tuple[np.ndarray, Sequence]:
    if s.dim != 1:
        raise ValueError("forecasting operates on scalar (d=1) series")
    if s.length <= input_length:
        raise ValueError(
            f"series of length {s.length} is too short for prefix length {input_length}"
        )
    return s.values[0, :input_length], Sequence(s.values[:, input_length:])


def forecast_predict(model: ForecastModel, prefix: Sequence) -> Sequence:
    """Deterministic forward pass; output length is fixed by the model."""
    if prefix.dim != 1 or prefix.length != model.input_length:
        raise ValueError(
            f"prefix must be 1 x {model.input_length}, got {prefix.dim} x {prefix.length}"
        )
    x = prefix.values[0]
    h = np.maximum(model.w1 @ x + model.b1, 0.0)
    return Sequence(model.w2 @ h + model.b2)


def _pair_field(
    psi: Sequence, fut: Sequence, sigma_model: Optional[UncertaintyModel]
) -> VarianceField:
    if sigma_model is None:
        return VarianceField.unit((psi.length, fut.length))
    return compose_variance(
        predict_token_variance(sigma_model, psi),
        predict_token_variance(sigma_model, fut),
    )


def forecast_loss(
    data: list[Sequence],
    model: ForecastModel,
    p: GibbsParams,
    beta: float = 0.0,
    sigma_model: Optional[UncertaintyModel] = None,
    frozen_couplings: Optional[list[np.ndarray]] = None,
) -> float:
    """Total alignment loss over the set.

    With ``frozen_couplings`` the loss is evaluated as <G, C/S> + beta
    <G, log S> per series against the supplied coupling matrices, which is
    the function the detached gradients differentiate exactly.
    """
    total = 0.0
    for i, s in enumerate(data):
        prefix, fut = split_series(s, model.input_length)
        psi = forecast_predict(model, Sequence(prefix))
        field = _pair_field(psi, fut, sigma_model)
        if frozen_couplings is None:
            out = udtw_evaluate(pairwise_cost(psi, fut), field, p)
            total += out.dist + beta * out.omega
        else:
            g = frozen_couplings[i]
            ct = pairwise_cost(psi, fut).entries / field.clamped()
            total += float((g * ct).sum() + beta * (g * np.log(field.clamped())).sum())
    return float(total)


def forecast_gradients(
    data: list[Sequence],
    model: ForecastModel,
    p: GibbsParams,
    beta: float = 0.0,
    sigma_model: Optional[UncertaintyModel] = None,
) -> tuple[float, list[np.ndarray], Optional[np.ndarray], list[np.ndarray]]:
    """Loss, MLP parameter gradients, uncertainty-head gradient, couplings.

    Gradients use detached couplings, including the chain through the
    uncertainty head's dependence on the predicted future.
    """
    grads = [np.zeros_like(a) for a in model.params()]
    g_sigma = np.zeros_like(sigma_model.weights) if sigma_model is not None else None
    couplings: list[np.ndarray] = []
    total = 0.0
    for s in data:
        prefix, fut = split_series(s, model.input_length)
        x = prefix
        pre = model.w1 @ x + model.b1
        h = np.maximum(pre, 0.0)
        psi = Sequence(model.w2 @ h + model.b2)

        field = _pair_field(psi, fut, sigma_model)
        C = pairwise_cost(psi, fut)
        out = udtw_evaluate(C, field, p)
        total += out.dist + beta * out.omega
        couplings.append(out.coupling)

        sv = field.clamped()
        g = out.coupling
        # d loss / d psi through the cost matrix, coupling held constant
        gc = g / sv
        d_psi = 2.0 * (psi.values[0] * gc.sum(axis=1) - gc @ fut.values[0])

        if sigma_model is not None:
            _, d_dist_dS, d_omega_dS = udtw_grad(C, field, p, mode="detached")
            dS = d_dist_dS + beta * d_omega_dS
            d_s_psi = 0.5 * dS.sum(axis=1)
            d_s_fut = 0.5 * dS.sum(axis=0)
            g_sigma += model_grad(sigma_model, d_s_psi, psi)
            g_sigma += model_grad(sigma_model, d_s_fut, fut)
            d_psi += token_variance_input_grad(sigma_model, d_s_psi, psi)[0]

        grads[2] += np.outer(d_psi, h)
        grads[3] += d_psi
        dh = model.w2.T @ d_psi
        dh[pre <= 0] = 0.0
        grads[0] += np.outer(dh, x)
        grads[1] += dh
    return float(total), grads, g_sigma, couplings


def forecast_train(
    data: list[Sequence],
    model: ForecastModel,
    p: GibbsParams,
    beta: float = 0.0,
    split: float = 0.6,
    epochs: int = 100,
    step: float = 1e-3,
    sigma_model: Optional[UncertaintyModel] = None,
) -> tuple[ForecastModel, np.ndarray]:
    """Full-batch gradient descent with a fixed step size.

    The model (and the uncertainty head, if given) is updated in place;
    the returned trace holds the loss at the start of every epoch.
    """
    if not data:
        raise ValueError("training set must not be empty")
    lengths = {s.length for s in data}
    if len(lengths) != 1:
        raise ValueError("all series must share one length")
    tau = lengths.pop()
    expected = int(round(split * tau))
    if expected != model.input_length or tau - expected != model.output_length:
        raise ValueError(
            f"split {split} of length {tau} implies prefix {expected} / future "
            f"{tau - expected}; model has {model.input_length} / {model.output_length}"
        )
    trace = np.empty(epochs)
    for epoch in range(epochs):
        loss, grads, g_sigma, _ = forecast_gradients(data, model, p, beta, sigma_model)
        if not np.isfinite(loss) or loss > DIVERGENCE_LIMIT:
            raise RuntimeError(
                f"forecast training diverged at epoch {epoch}: loss={loss:.3e} "
                f"(step={step}); reduce the step size"
            )
        trace[epoch] = loss
        for param, grad in zip(model.params(), grads):
            param -= step * grad
        if sigma_model is not None:
            sigma_model.weights -= step * g_sigma
    return model, trace


def forecast_mse(model: ForecastModel, data: list[Sequence]) -> float:
    """Mean squared error of the predicted futures over a set of series."""
    errs = []
    for s in data:
        prefix, fut = split_series(s, model.input_length)
        psi = forecast_predict(model, Sequence(prefix))
        errs.append(np.mean((psi.values - fut.values) ** 2))
    return float(np.mean(errs))
