"""Episodic metric losses: supervised regression-to-delta and InfoNCE."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..alignment import align
from ..types import GibbsParams, Sequence
from ..uncertainty import resolve_variance_field

__all__ = [
    "Episode",
    "ContrastiveConfig",
    "episodic_supervised_loss",
    "infonce_loss",
]


@dataclass
class Episode:
    """One few-shot episode: a query against an n_way x z_shot support grid.

    The similarity targets are 0 for the first (matching) class and 1 for
    every other class.
    """

    query: Sequence
    supports: list[list[Sequence]]
    delta: np.ndarray = field(default=None)

    def __post_init__(self):
        if not self.supports or not all(self.supports):
            raise ValueError("support grid must be complete")
        z = len(self.supports[0])
        if any(len(row) != z for row in self.supports):
            raise ValueError("every class must have the same number of shots")
        if self.delta is None:
            self.delta = np.ones(len(self.supports))
            self.delta[0] = 0.0
        self.delta = np.asarray(self.delta, dtype=np.float64)
        expected = np.ones(len(self.supports))
        expected[0] = 0.0
        if self.delta.shape != expected.shape or not np.array_equal(self.delta, expected):
            raise ValueError("delta must be binary with exactly the first entry 0")

    @property
    def n_way(self) -> int:
        return len(self.supports)

    @property
    def z_shot(self) -> int:
        return len(self.supports[0])


@dataclass
class ContrastiveConfig:
    temperature: float
    beta: float = 0.0

    def __post_init__(self):
        if not self.temperature > 0:
            raise ValueError("temperature must be positive")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")


def episodic_supervised_loss(
    episodes: list[Episode],
    p: GibbsParams,
    beta: float = 0.0,
    variances=None,
) -> float:
    """sum_b sum_n sum_z (dist - delta_n)^2 + beta * omega."""
    if not episodes:
        raise ValueError("need at least one episode")
    total = 0.0
    for ep in episodes:
        for n, row in enumerate(ep.supports):
            for support in row:
                out = align(
                    ep.query,
                    support,
                    p,
                    resolve_variance_field(ep.query, support, variances),
                )
                total += (out.dist - ep.delta[n]) ** 2 + beta * out.omega
    return float(total)


def infonce_loss(
    pairs: list[tuple[Sequence, Sequence]],
    cfg: ContrastiveConfig,
    p: GibbsParams,
    variances=None,
) -> float:
    """Batch-averaged contrastive loss over alignment distances.

    For each first-view item the positive is its own second view and the
    negatives are every other second view in the batch; the regularizer is
    beta * omega on the positive pairs.
    """
    if not pairs:
        raise ValueError("batch must not be empty")
    b = len(pairs)
    dists = np.empty((b, b))
    omegas = np.empty(b)
    for i, (first, _) in enumerate(pairs):
        for j, (_, second) in enumerate(pairs):
            out = align(first, second, p, resolve_variance_field(first, second, variances))
            dists[i, j] = out.dist
            if i == j:
                omegas[i] = out.omega
    logits = -dists / cfg.temperature
    shift = logits.max(axis=1, keepdims=True)
    log_denominator = shift[:, 0] + np.log(np.exp(logits - shift).sum(axis=1))
    losses = -(np.diag(logits) - log_denominator) + cfg.beta * omegas
    return float(losses.mean())
