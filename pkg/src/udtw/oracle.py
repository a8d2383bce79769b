"""Exact small-instance oracle: explicit enumeration of alignment paths.

Everything here is exponential in the sequence lengths and exists to give
the polynomial-time kernels an independent ground truth. The enumeration
is guarded by a configurable size limit.
"""

from __future__ import annotations

from math import comb

import numpy as np

from .alignment import gibbs_weights
from .types import (
    AlignmentOutcome,
    AlignmentPath,
    CostMatrix,
    GibbsParams,
    PathDistribution,
    VarianceField,
)

DEFAULT_ORACLE_LIMIT = 8

__all__ = [
    "DEFAULT_ORACLE_LIMIT",
    "delannoy_number",
    "enumerate_paths",
    "udtw_bruteforce",
]


def delannoy_number(a: int, b: int) -> int:
    """Count of monotone lattice paths on an (a+1) x (b+1) grid."""
    return sum(comb(a, i) * comb(b, i) * 2**i for i in range(min(a, b) + 1))


def _check_limit(tau: int, tau_prime: int, limit: int) -> None:
    if tau < 1 or tau_prime < 1:
        raise ValueError("path grid needs tau, tau' >= 1")
    if tau > limit or tau_prime > limit:
        raise ValueError(
            f"instance {tau}x{tau_prime} exceeds the oracle limit {limit}; "
            "path enumeration would explode combinatorially"
        )


def enumerate_paths(
    tau: int, tau_prime: int, limit: int = DEFAULT_ORACLE_LIMIT
) -> list[AlignmentPath]:
    """Every admissible monotone path from (1,1) to (tau, tau')."""
    _check_limit(tau, tau_prime, limit)
    out: list[AlignmentPath] = []
    stack: list[tuple[int, int]] = []

    def walk(m: int, n: int) -> None:
        stack.append((m, n))
        if m == tau and n == tau_prime:
            out.append(AlignmentPath(list(stack)))
        else:
            if m < tau:
                walk(m + 1, n)
            if n < tau_prime:
                walk(m, n + 1)
            if m < tau and n < tau_prime:
                walk(m + 1, n + 1)
        stack.pop()

    walk(1, 1)
    return out


def udtw_bruteforce(
    C: CostMatrix,
    S: VarianceField,
    p: GibbsParams,
    limit: int = DEFAULT_ORACLE_LIMIT,
) -> tuple[AlignmentOutcome, PathDistribution]:
    """Soft alignment by explicit path enumeration.

    Builds the per-path precision-weighted costs and log-variance penalties,
    weights them with the shared Gibbs distribution, and accumulates the
    coupling cell by cell.
    """
    tau, tau_prime = C.shape
    _check_limit(tau, tau_prime, limit)
    if C.shape != S.shape:
        raise ValueError(f"cost shape {C.shape} does not match variance shape {S.shape}")
    sv = S.clamped()
    ct = C.entries / sv
    logs = np.log(sv)

    paths = enumerate_paths(tau, tau_prime, limit)
    w = np.empty(len(paths))
    u = np.empty(len(paths))
    for i, path in enumerate(paths):
        w[i] = sum(ct[m - 1, n - 1] for m, n in path.steps)
        u[i] = sum(logs[m - 1, n - 1] for m, n in path.steps)

    probs = gibbs_weights(w, p)
    coupling = np.zeros(C.shape)
    for path, prob in zip(paths, probs):
        for m, n in path.steps:
            coupling[m - 1, n - 1] += prob

    lo = w.min()
    softmin_value = float(lo - p.gamma * np.log(np.exp(-(w - lo) / p.gamma).sum()))
    outcome = AlignmentOutcome(
        dist=float(np.dot(w, probs)),
        omega=float(np.dot(u, probs)),
        coupling=coupling,
        softmin_value=softmin_value,
    )
    return outcome, PathDistribution(paths=paths, costs=w, penalties=u, probabilities=probs)
