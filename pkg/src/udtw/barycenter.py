"""Frechet means of sequence sets under the soft alignment objective.

The mean minimizes sum_n dist(x_n, mu) + beta * omega(x_n, mu), optimized
with a two-loop L-BFGS and an Armijo backtracking line search. Variances
are either fixed to one or free per timestep of the mean, reparameterized
through a scaled logistic so they stay in [0.1, 10].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .alignment import pairwise_cost, udtw_evaluate
from .gradients import udtw_grad, udtw_grad_sequence
from .types import GibbsParams, Sequence, VarianceField

VARIANCE_MODES = ("fixed_unit", "free_per_timestep")
VAR_LO, VAR_HI = 0.1, 10.0

__all__ = [
    "FrechetConfig",
    "FrechetResult",
    "resample_sequence",
    "barycenter_objective",
    "barycenter_grad",
    "frechet_mean",
]


@dataclass
class FrechetConfig:
    gibbs: GibbsParams
    target_length: Optional[int] = None  # None: rounded average input length
    max_iters: int = 100
    lbfgs_memory: int = 10
    tol: float = 1e-6
    variance_mode: str = "fixed_unit"
    lambda_unit: float = 0.0  # optional pull of log-variances toward zero

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.variance_mode not in VARIANCE_MODES:
            raise ValueError(f"unknown variance mode {self.variance_mode!r}")
        if self.lambda_unit < 0:
            raise ValueError("lambda_unit must be nonnegative")


@dataclass
class FrechetResult:
    mean: Sequence
    trace: np.ndarray
    variances: Optional[np.ndarray]  # per-timestep, free mode only
    line_search_warning: bool
    iterations: int


def resample_sequence(values: np.ndarray, length: int) -> np.ndarray:
    """Linear interpolation of every feature row onto ``length`` timesteps."""
    d, tau = values.shape
    if tau == length:
        return values.copy()
    src = np.linspace(0.0, 1.0, tau)
    dst = np.linspace(0.0, 1.0, length)
    return np.vstack([np.interp(dst, src, values[i]) for i in range(d)])


def _logistic(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def variances_from_raw(rho: np.ndarray) -> np.ndarray:
    return VAR_LO + (VAR_HI - VAR_LO) * _logistic(rho)


def _field_for_pair(x: Sequence, mean_len: int, variances: Optional[np.ndarray]) -> VarianceField:
    if variances is None:
        return VarianceField.unit((x.length, mean_len))
    entries = np.broadcast_to(variances[None, :], (x.length, mean_len)).copy()
    return VarianceField(entries, mode="joint_pairwise")


def _check_data(data: list[Sequence]) -> int:
    if not data:
        raise ValueError("barycenter needs at least one sequence")
    d = data[0].dim
    for s in data:
        if s.dim != d:
            raise ValueError("all sequences must share the feature dimension")
    return d


def barycenter_objective(
    mean: Sequence,
    data: list[Sequence],
    cfg: FrechetConfig,
    variances: Optional[np.ndarray] = None,
) -> float:
    """Sum over the data of dist + beta * omega against the candidate mean."""
    _check_data(data)
    beta = cfg.gibbs.beta
    total = 0.0
    for x in data:  # index-ascending accumulation, kept deterministic
        field = _field_for_pair(x, mean.length, variances)
        out = udtw_evaluate(pairwise_cost(x, mean), field, cfg.gibbs)
        total += out.dist + beta * out.omega
    if variances is not None and cfg.lambda_unit > 0:
        total += cfg.lambda_unit * float((np.log(variances) ** 2).sum())
    return float(total)


def barycenter_grad(
    mean: Sequence,
    data: list[Sequence],
    cfg: FrechetConfig,
    variances: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Detached-coupling gradients w.r.t. the mean columns (and free variances)."""
    _check_data(data)
    beta = cfg.gibbs.beta
    g_mean = np.zeros_like(mean.values)
    g_var = np.zeros(mean.length) if variances is not None else None
    for x in data:
        field = _field_for_pair(x, mean.length, variances)
        g_mean += udtw_grad_sequence(x, mean, field, cfg.gibbs, mode="detached")
        if variances is not None:
            C = pairwise_cost(x, mean)
            _, d_dist_dS, d_omega_dS = udtw_grad(C, field, cfg.gibbs, mode="detached")
            g_var += (d_dist_dS + beta * d_omega_dS).sum(axis=0)
    if variances is not None and cfg.lambda_unit > 0:
        g_var += cfg.lambda_unit * 2.0 * np.log(variances) / variances
    return g_mean, g_var


def _two_loop(grad: np.ndarray, history: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    q = grad.copy()
    alphas = []
    for s, y in reversed(history):
        rho = 1.0 / float(y @ s)
        alpha = rho * float(s @ q)
        q -= alpha * y
        alphas.append((alpha, rho))
    if history:
        s, y = history[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), (alpha, rho) in zip(history, reversed(alphas)):
        beta = rho * float(y @ q)
        q += (alpha - beta) * s
    return q


def frechet_mean(data: list[Sequence], cfg: FrechetConfig) -> FrechetResult:
    """Optimize the mean (and optionally its per-timestep variances).

    Starts from the length-resampled Euclidean average, runs L-BFGS with
    Armijo backtracking (c1 = 1e-4, step halving, at most 20 halvings).
    A failed line search falls back to a plain gradient step of 1e-3; five
    consecutive fallbacks abort with a warning flag. Accepted steps never
    increase the objective.
    """
    d = _check_data(data)
    target = cfg.target_length or int(round(np.mean([s.length for s in data])))
    init = np.mean([resample_sequence(s.values, target) for s in data], axis=0)
    free = cfg.variance_mode == "free_per_timestep"
    n_mean = d * target

    def unpack(x: np.ndarray) -> tuple[Sequence, Optional[np.ndarray]]:
        mean = Sequence(x[:n_mean].reshape(d, target), name="barycenter")
        var = variances_from_raw(x[n_mean:]) if free else None
        return mean, var

    def objective(x: np.ndarray) -> float:
        mean, var = unpack(x)
        return barycenter_objective(mean, data, cfg, var)

    def gradient(x: np.ndarray) -> np.ndarray:
        mean, var = unpack(x)
        g_mean, g_var = barycenter_grad(mean, data, cfg, var)
        if not free:
            return g_mean.ravel()
        rho = x[n_mean:]
        sig = _logistic(rho)
        return np.concatenate([g_mean.ravel(), g_var * (VAR_HI - VAR_LO) * sig * (1 - sig)])

    x = init.ravel().copy()
    if free:
        x = np.concatenate([x, np.zeros(target)])  # logistic(0) -> midpoint variance

    f = objective(x)
    g = gradient(x)
    trace = [f]
    best_f, best_x = f, x.copy()
    history: list[tuple[np.ndarray, np.ndarray]] = []
    warning = False
    consecutive_fallbacks = 0
    iterations = 0

    for iterations in range(1, cfg.max_iters + 1):
        if np.max(np.abs(g)) <= cfg.tol:
            iterations -= 1
            break
        direction = -_two_loop(g, history)
        slope = float(g @ direction)
        if slope >= 0:  # history gave a non-descent direction
            direction = -g
            slope = float(g @ direction)

        step, accepted, f_new = 1.0, False, f
        for _ in range(20):
            cand = x + step * direction
            f_cand = objective(cand)
            if f_cand <= f + 1e-4 * step * slope:
                accepted, x_new, f_new = True, cand, f_cand
                break
            step *= 0.5

        if not accepted and abs(slope) <= 1e-8 * max(1.0, abs(f)):
            # the directional derivative is at rounding level: converged
            iterations -= 1
            break

        if accepted:
            consecutive_fallbacks = 0
        else:
            consecutive_fallbacks += 1
            cand = x - 1e-3 * g
            f_cand = objective(cand)
            if f_cand <= f:
                x_new, f_new, accepted = cand, f_cand, True
            if not accepted:
                if consecutive_fallbacks >= 5:
                    warning = True
                    break
                continue  # no movement; retry (bounded by the fallback counter)

        g_new = gradient(x_new)
        s, y = x_new - x, g_new - g
        if float(s @ y) > 1e-12:
            history.append((s, y))
            if len(history) > cfg.lbfgs_memory:
                history.pop(0)
        x, f, g = x_new, f_new, g_new
        trace.append(f)
        if f < best_f:
            best_f, best_x = f, x.copy()
        if consecutive_fallbacks >= 5:
            warning = True
            break

    mean, var = unpack(best_x)
    return FrechetResult(
        mean=mean,
        trace=np.asarray(trace),
        variances=var,
        line_search_warning=warning,
        iterations=iterations,
    )
