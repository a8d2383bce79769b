"""Built-in verification suites: identity, limit, gradient, and noise checks.

These are the same checks the test suite runs, packaged so a deployed
binary can re-verify itself (`udtw selftest`). Every suite is seeded and
deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .alignment import hard_dtw, udtw_evaluate
from .gradients import udtw_grad
from .oracle import enumerate_paths, udtw_bruteforce
from .types import CostMatrix, GibbsParams, VarianceField

__all__ = ["SuiteResult", "run_selftest", "mc_path_cost_check"]


@dataclass
class SuiteResult:
    name: str
    passed: bool
    detail: str


def _random_instance(rng, max_len=5, max_cost=4.0):
    t = int(rng.integers(1, max_len + 1))
    tp = int(rng.integers(1, max_len + 1))
    C = CostMatrix(rng.uniform(0.0, max_cost, size=(t, tp)))
    S = VarianceField(rng.uniform(0.1, 10.0, size=(t, tp)))
    return C, S


def oracle_equivalence_suite(trials: int, seed: int, oracle_limit: int) -> SuiteResult:
    """DP dist/omega/coupling must match the enumeration oracle at 1e-8."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        C, S = _random_instance(rng, max_len=min(5, oracle_limit))
        for gamma in (0.1, 1.0, 10.0):
            p = GibbsParams(gamma=gamma)
            ref, _ = udtw_bruteforce(C, S, p, limit=oracle_limit)
            got = udtw_evaluate(C, S, p)
            for name in ("dist", "omega", "softmin_value"):
                a, b = getattr(ref, name), getattr(got, name)
                rel = abs(a - b) / max(1e-30, abs(a))
                worst = max(worst, rel)
            worst = max(worst, float(np.abs(ref.coupling - got.coupling).max()))
    passed = worst <= 1e-8
    return SuiteResult("oracle_equivalence", passed, f"worst deviation {worst:.3e}")


def deterministic_limit_suite(trials: int, seed: int, oracle_limit: int) -> SuiteResult:
    """gamma = 1e-3 must land on the unique min path when the margin is >= 0.1."""
    rng = np.random.default_rng(seed)
    p = GibbsParams(gamma=1e-3)
    worst = 0.0
    done = 0
    while done < trials:
        C, S = _random_instance(rng, max_len=min(5, oracle_limit))
        if C.shape == (1, 1):
            continue
        _, dist_info = udtw_bruteforce(C, S, GibbsParams(gamma=1.0), limit=oracle_limit)
        order = np.argsort(dist_info.costs)
        if len(order) < 2 or dist_info.costs[order[1]] - dist_info.costs[order[0]] < 0.1:
            continue
        done += 1
        hard_cost, path = hard_dtw(C, S)
        u_star = float(
            sum(np.log(S.clamped())[m - 1, n - 1] for m, n in path.steps)
        )
        out = udtw_evaluate(C, S, p)
        worst = max(worst, abs(out.dist - hard_cost), abs(out.omega - u_star))
    passed = worst <= 1e-3
    return SuiteResult("deterministic_limit", passed, f"worst deviation {worst:.3e}")


def gradient_suite(trials: int, seed: int, oracle_limit: int) -> SuiteResult:
    """Exact-oracle gradients must match central finite differences.

    Deviations are measured relative to the gradient's largest magnitude
    (entries may legitimately cross zero).
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        t = int(rng.integers(2, 4))
        tp = int(rng.integers(2, 4))
        C = CostMatrix(rng.uniform(0.0, 4.0, size=(t, tp)))
        S = VarianceField(rng.uniform(0.5, 2.0, size=(t, tp)))
        p = GibbsParams(gamma=0.5)
        exact = udtw_grad(C, S, p, mode="exact_oracle", oracle_limit=oracle_limit)
        fd = udtw_grad(C, S, p, mode="finite_difference")
        for e, f in zip(exact, fd):
            scale = max(1.0, float(np.abs(e).max()))
            worst = max(worst, float(np.abs(e - f).max()) / scale)
    passed = worst <= 1e-4
    return SuiteResult("gradient", passed, f"worst relative deviation {worst:.3e}")


def mc_path_cost_check(
    rng: np.random.Generator, draws: int = 10000
) -> tuple[float, float, float]:
    """One noise-robustness configuration.

    Returns (monte carlo mean, closed-form expectation, standard error) of
    the precision-weighted cost of a fixed path under i.i.d. Gaussian
    perturbations of both sequences.
    """
    t = int(rng.integers(1, 5))
    tp = int(rng.integers(1, 5))
    d = int(rng.integers(1, 4))
    x = rng.normal(size=(d, t))
    y = rng.normal(size=(d, tp))
    sigma = rng.uniform(0.5, 2.0, size=(t, tp))
    gam_a = rng.uniform(0.05, 0.5, size=t)  # per-index noise variances
    gam_b = rng.uniform(0.05, 0.5, size=tp)

    paths = enumerate_paths(t, tp)
    path = paths[int(rng.integers(0, len(paths)))]

    closed = 0.0
    for m, n in path.steps:
        diff = x[:, m - 1] - y[:, n - 1]
        closed += float(diff @ diff) / sigma[m - 1, n - 1]
        closed += d * (gam_a[m - 1] + gam_b[n - 1]) / sigma[m - 1, n - 1]

    eps_a = rng.normal(size=(draws, t, d)) * np.sqrt(gam_a)[None, :, None]
    eps_b = rng.normal(size=(draws, tp, d)) * np.sqrt(gam_b)[None, :, None]
    costs = np.zeros(draws)
    for m, n in path.steps:
        delta = (x[:, m - 1] - y[:, n - 1])[None, :] + eps_a[:, m - 1] - eps_b[:, n - 1]
        costs += (delta**2).sum(axis=1) / sigma[m - 1, n - 1]
    se = float(costs.std(ddof=1) / np.sqrt(draws))
    return float(costs.mean()), closed, se


def noise_robustness_suite(trials: int, seed: int, draws: int = 10000) -> SuiteResult:
    rng = np.random.default_rng(seed)
    worst_z = 0.0
    for _ in range(trials):
        mean, closed, se = mc_path_cost_check(rng, draws)
        worst_z = max(worst_z, abs(mean - closed) / se)
    passed = worst_z <= 3.0
    return SuiteResult("noise_robustness", passed, f"worst z-score {worst_z:.2f}")


def run_selftest(
    trials: int = 50, seed: int = 0, oracle_limit: int = 5, mc_trials: int = 10
) -> list[SuiteResult]:
    return [
        oracle_equivalence_suite(trials, seed, oracle_limit),
        deterministic_limit_suite(trials, seed + 1, oracle_limit),
        gradient_suite(max(10, trials // 2), seed + 2, oracle_limit),
        noise_robustness_suite(mc_trials, seed + 3),
    ]
