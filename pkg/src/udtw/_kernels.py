"""Numba-compiled dynamic-programming kernels.

All kernels operate on the precision-weighted cost matrix (cost divided by
variance) and are pure functions, safe to call from multiple threads.
"""

import numpy as np
from numba import njit

INF = np.inf


@njit(cache=True, nogil=True)
def forward_log_dp(ct, gamma):
    """Soft-min forward recursion over the precision-weighted costs ``ct``.

    Returns the (tau+1) x (tau'+1) accumulator with 1-based indexing;
    r[tau, tau'] is -gamma * log of the path partition function.
    """
    t, tp = ct.shape
    r = np.full((t + 1, tp + 1), INF)
    r[1, 1] = ct[0, 0]
    for m in range(1, t + 1):
        for n in range(1, tp + 1):
            if m == 1 and n == 1:
                continue
            a = r[m - 1, n - 1]
            b = r[m - 1, n]
            c = r[m, n - 1]
            lo = min(a, min(b, c))
            if lo == INF:
                continue
            s = (
                np.exp(-(a - lo) / gamma)
                + np.exp(-(b - lo) / gamma)
                + np.exp(-(c - lo) / gamma)
            )
            r[m, n] = ct[m - 1, n - 1] + lo - gamma * np.log(s)
    return r


@njit(cache=True, nogil=True)
def backward_coupling(ct, r, gamma):
    """Gradient of the forward terminal value w.r.t. each cell of ``ct``.

    Equals the probability that a Gibbs-random admissible path visits the
    cell. Exponents are nonpositive by construction, so no overflow guard
    is needed.
    """
    t, tp = ct.shape
    e = np.zeros((t + 1, tp + 1))
    e[t, tp] = 1.0
    for m in range(t, 0, -1):
        for n in range(tp, 0, -1):
            if m == t and n == tp:
                continue
            acc = 0.0
            if m + 1 <= t and r[m + 1, n] != INF:
                acc += e[m + 1, n] * np.exp((r[m + 1, n] - ct[m, n - 1] - r[m, n]) / gamma)
            if n + 1 <= tp and r[m, n + 1] != INF:
                acc += e[m, n + 1] * np.exp((r[m, n + 1] - ct[m - 1, n] - r[m, n]) / gamma)
            if m + 1 <= t and n + 1 <= tp and r[m + 1, n + 1] != INF:
                acc += e[m + 1, n + 1] * np.exp((r[m + 1, n + 1] - ct[m, n] - r[m, n]) / gamma)
            e[m, n] = acc
    return e[1:, 1:]


@njit(cache=True, nogil=True)
def hard_forward(ct):
    """Min-plus accumulation; r[tau, tau'] is the classical warping cost."""
    t, tp = ct.shape
    r = np.full((t + 1, tp + 1), INF)
    r[1, 1] = ct[0, 0]
    for m in range(1, t + 1):
        for n in range(1, tp + 1):
            if m == 1 and n == 1:
                continue
            lo = min(r[m - 1, n - 1], min(r[m - 1, n], r[m, n - 1]))
            r[m, n] = ct[m - 1, n - 1] + lo
    return r
