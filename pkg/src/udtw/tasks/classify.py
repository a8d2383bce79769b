"""Nearest-neighbor and nearest-centroid classification on alignment scores."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from ..alignment import align
from ..barycenter import FrechetConfig, frechet_mean
from ..types import GibbsParams, LabeledSet, Sequence, VarianceField
from ..uncertainty import resolve_variance_field

__all__ = [
    "pair_score",
    "score_matrix",
    "knn_classify",
    "centroid_classify",
    "fit_class_centroids",
]


def pair_score(
    a: Sequence,
    b: Sequence,
    p: GibbsParams,
    beta: float = 0.0,
    variances=None,
    length_normalize: bool = False,
) -> float:
    """dist + beta * omega for one pair, optionally divided by tau + tau'."""
    field = resolve_variance_field(a, b, variances)
    out = align(a, b, p, field)
    score = out.dist + beta * out.omega
    if length_normalize:
        score /= a.length + b.length
    return float(score)


def score_matrix(
    queries: list[Sequence],
    refs: list[Sequence],
    p: GibbsParams,
    beta: float = 0.0,
    variances=None,
    threads: int = 1,
    length_normalize: bool = False,
) -> np.ndarray:
    """Alignment scores for every (query, ref) pair.

    Pairs are independent, so the matrix is identical for any thread count;
    entries are written by index, never reduced across threads.
    """
    out = np.empty((len(queries), len(refs)))
    pairs = [(i, j) for i in range(len(queries)) for j in range(len(refs))]

    def work(ij):
        i, j = ij
        return pair_score(queries[i], refs[j], p, beta, variances, length_normalize)

    if threads <= 1:
        values = [work(ij) for ij in pairs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(work, pairs))
    for (i, j), v in zip(pairs, values):
        out[i, j] = v
    return out


def knn_classify(
    train: LabeledSet,
    query: Sequence,
    k: int,
    p: GibbsParams,
    beta: float = 0.0,
    variances=None,
    threads: int = 1,
    length_normalize: bool = False,
) -> int:
    """Majority label among the k nearest training items.

    Ties on the vote count are broken by the smaller mean score, then by
    the lower label id.
    """
    if k < 1 or k > len(train):
        raise ValueError(f"k must be in [1, {len(train)}], got {k}")
    scores = score_matrix(
        [query], train.sequences, p, beta, variances, threads, length_normalize
    )[0]
    order = np.argsort(scores, kind="stable")[:k]
    votes = Counter(train.labels[i] for i in order)
    top = max(votes.values())
    tied = [label for label, c in votes.items() if c == top]
    if len(tied) == 1:
        return tied[0]
    means = {
        label: np.mean([scores[i] for i in order if train.labels[i] == label])
        for label in tied
    }
    best = min(means.values())
    return min(label for label, m in means.items() if m == best)


def centroid_classify(
    centroids: list[tuple[Sequence, int, Optional[np.ndarray]]],
    query: Sequence,
    p: GibbsParams,
    beta: float = 0.0,
    length_normalize: bool = False,
) -> int:
    """Label of the centroid with the smallest dist + beta * omega.

    Each centroid is (sequence, label, per-timestep variances or None).
    Exact ties go to the lowest label id.
    """
    if not centroids:
        raise ValueError("need at least one centroid")
    best_score, best_label = np.inf, None
    for seq, label, var in centroids:
        if var is None:
            field = None
        else:
            field = VarianceField(
                np.broadcast_to(var[None, :], (query.length, seq.length)).copy(),
                mode="joint_pairwise",
            )
        score = pair_score(query, seq, p, beta, field, length_normalize)
        if score < best_score or (score == best_score and label < best_label):
            best_score, best_label = score, label
    return best_label


def fit_class_centroids(
    train: LabeledSet, cfg: FrechetConfig
) -> list[tuple[Sequence, int, Optional[np.ndarray]]]:
    """One Frechet mean per class, in ascending label order."""
    centroids = []
    for label in train.classes():
        members = [seq for seq, lab in train.items if lab == label]
        result = frechet_mean(members, cfg)
        centroids.append((result.mean, label, result.variances))
    return centroids
