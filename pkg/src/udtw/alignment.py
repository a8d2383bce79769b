"""Soft and hard alignment kernels.

The central quantity is the Gibbs distribution over admissible monotone
alignment paths induced by precision-weighted pairwise costs. The expected
path cost (``dist``), the expected log-variance along the path (``omega``)
and the per-cell visit probabilities (``coupling``) are all computed in
polynomial time by a forward/backward pass; ``oracle.udtw_bruteforce``
realizes the same quantities by explicit enumeration and serves as ground
truth in the tests.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .types import (
    AlignmentOutcome,
    AlignmentPath,
    CostMatrix,
    GibbsParams,
    Sequence,
    VarianceField,
)

__all__ = [
    "pairwise_cost",
    "compose_variance",
    "softming",
    "softminsel",
    "gibbs_weights",
    "udtw_evaluate",
    "hard_dtw",
    "align",
]


def pairwise_cost(a: Sequence, b: Sequence) -> CostMatrix:
    """Squared Euclidean distances between every column pair of ``a``, ``b``."""
    if a.dim != b.dim:
        raise ValueError(
            f"feature dimensions differ: {a.dim} vs {b.dim}; sequences must share d"
        )
    x, y = a.values, b.values
    sq = (
        (x * x).sum(axis=0)[:, None]
        + (y * y).sum(axis=0)[None, :]
        - 2.0 * (x.T @ y)
    )
    # the expansion can go slightly negative for identical columns
    np.maximum(sq, 0.0, out=sq)
    return CostMatrix(sq)


def compose_variance(sa: np.ndarray, sb: np.ndarray) -> VarianceField:
    """Additive per-token composition: entry (m, n) = (sa[m] + sb[n]) / 2."""
    sa = np.asarray(sa, dtype=np.float64).ravel()
    sb = np.asarray(sb, dtype=np.float64).ravel()
    if np.any(sa <= 0) or np.any(sb <= 0):
        raise ValueError("per-token variances must be strictly positive")
    if not (np.all(np.isfinite(sa)) and np.all(np.isfinite(sb))):
        raise ValueError("per-token variances must be finite")
    return VarianceField(0.5 * (sa[:, None] + sb[None, :]), mode="additive_per_token")


def gibbs_weights(w: np.ndarray, p: GibbsParams) -> np.ndarray:
    """Normalized Gibbs weights exp(-(w - mu)/gamma) / sum(...).

    The declared shift ``mu`` cancels after normalization; an additional
    max-shift is applied before exponentiation so the evaluation cannot
    overflow for any input scale.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    if w.size == 0:
        raise ValueError("weight vector must be nonempty")
    if not np.all(np.isfinite(w)):
        raise ValueError("weight vector must be finite")
    mu = w.mean() if p.shift_policy == "mean" else 0.0
    z = -(w - mu) / p.gamma
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def softming(w: np.ndarray, p: GibbsParams) -> float:
    """Gibbs-weighted expectation of ``w`` (a smooth minimum as gamma -> 0)."""
    w = np.asarray(w, dtype=np.float64).ravel()
    return float(np.dot(w, gibbs_weights(w, p)))


def softminsel(w: np.ndarray, u: np.ndarray, p: GibbsParams) -> float:
    """Expectation of ``u`` under the Gibbs weights of ``w``.

    Acts as a soft selector: as gamma -> 0 it returns the entry of ``u``
    at the argmin of ``w``.
    """
    w = np.asarray(w, dtype=np.float64).ravel()
    u = np.asarray(u, dtype=np.float64).ravel()
    if w.shape != u.shape:
        raise ValueError(f"length mismatch: w has {w.size} entries, u has {u.size}")
    return float(np.dot(u, gibbs_weights(w, p)))


def _weighted_cost(C: CostMatrix, S: VarianceField) -> tuple[np.ndarray, np.ndarray]:
    if C.shape != S.shape:
        raise ValueError(f"cost shape {C.shape} does not match variance shape {S.shape}")
    sv = S.clamped()
    return np.ascontiguousarray(C.entries / sv), sv


def udtw_evaluate(C: CostMatrix, S: VarianceField, p: GibbsParams) -> AlignmentOutcome:
    """Soft alignment of a cost matrix under a variance field.

    Runs the log-domain forward recursion over the precision-weighted costs
    and the backward pass for the coupling matrix, then contracts:
    ``dist = <coupling, C/S>`` and ``omega = <coupling, log S>``. Because the
    coupling holds the per-cell visit probabilities, these contractions equal
    the Gibbs expectations of the per-path sums exactly; the enumeration
    oracle checks that identity in the tests.
    """
    ct, sv = _weighted_cost(C, S)
    r = _kernels.forward_log_dp(ct, p.gamma)
    coupling = _kernels.backward_coupling(ct, r, p.gamma)
    t, tp = ct.shape
    return AlignmentOutcome(
        dist=float((coupling * ct).sum()),
        omega=float((coupling * np.log(sv)).sum()),
        coupling=coupling,
        softmin_value=float(r[t, tp]),
    )


def hard_dtw(C: CostMatrix, S: VarianceField) -> tuple[float, AlignmentPath]:
    """Classical min-cost warping over the precision-weighted costs.

    Backtracking ties are broken by preferring the diagonal, then the
    vertical, then the horizontal predecessor.
    """
    ct, _ = _weighted_cost(C, S)
    r = _kernels.hard_forward(ct)
    t, tp = ct.shape
    cost = float(r[t, tp])
    steps = [(t, tp)]
    m, n = t, tp
    while (m, n) != (1, 1):
        candidates = []
        if m > 1 and n > 1:
            candidates.append((r[m - 1, n - 1], (m - 1, n - 1)))
        if m > 1:
            candidates.append((r[m - 1, n], (m - 1, n)))
        if n > 1:
            candidates.append((r[m, n - 1], (m, n - 1)))
        best = min(c[0] for c in candidates)
        # list order encodes the tie-break preference
        for value, cell in candidates:
            if value == best:
                m, n = cell
                break
        steps.append((m, n))
    steps.reverse()
    return cost, AlignmentPath(steps)


def align(
    a: Sequence,
    b: Sequence,
    p: GibbsParams,
    variances: VarianceField | None = None,
) -> AlignmentOutcome:
    """Convenience wrapper: pairwise costs from two sequences, then evaluate."""
    C = pairwise_cost(a, b)
    if variances is None:
        variances = VarianceField.unit(C.shape)
    return udtw_evaluate(C, variances, p)
