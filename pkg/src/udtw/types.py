"""Core value types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

# Variances below this floor are clamped before inversion so the precision
# weights stay finite.
VARIANCE_FLOOR = 1e-6

VARIANCE_MODES = ("additive_per_token", "joint_pairwise", "unit")
SHIFT_POLICIES = ("mean", "none")


def _as_matrix(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ValueError(f"expected a 1-D or 2-D array, got ndim={arr.ndim}")
    return arr


@dataclass
class Sequence:
    """An ordered collection of feature vectors, stored as a d x tau matrix.

    Columns are timesteps (or tokens), rows are feature dimensions. 1-D
    input is promoted to a single feature row.
    """

    values: np.ndarray
    name: Optional[str] = None

    def __post_init__(self):
        self.values = _as_matrix(self.values)
        if self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ValueError("sequence needs at least one feature dim and one timestep")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("sequence contains non-finite entries")

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]


@dataclass
class CostMatrix:
    """Pairwise squared distances between two sequences (tau x tau')."""

    entries: np.ndarray

    def __post_init__(self):
        self.entries = _as_matrix(self.entries)
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("cost matrix contains non-finite entries")
        if np.any(self.entries < 0):
            raise ValueError("cost matrix entries must be nonnegative")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass
class VarianceField:
    """Per-correspondence variances (tau x tau') plus how they were composed.

    ``mode`` is one of ``additive_per_token`` (built from two per-token
    vectors), ``joint_pairwise`` (predicted per pair) or ``unit`` (all ones).
    The element-wise inverse of ``entries`` is the precision weighting.
    """

    entries: np.ndarray
    mode: str = "joint_pairwise"

    def __post_init__(self):
        self.entries = _as_matrix(self.entries)
        if self.mode not in VARIANCE_MODES:
            raise ValueError(f"unknown variance mode {self.mode!r}")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("variance field contains non-finite entries")
        if np.any(self.entries <= 0):
            raise ValueError("variance field entries must be strictly positive")
        if self.mode == "unit" and not np.all(self.entries == 1.0):
            raise ValueError("unit variance field must be all ones")

    @classmethod
    def unit(cls, shape: tuple[int, int]) -> "VarianceField":
        return cls(np.ones(shape), mode="unit")

    def clamped(self) -> np.ndarray:
        """Entries with the numerical floor applied (used before inversion)."""
        return np.maximum(self.entries, VARIANCE_FLOOR)

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape


@dataclass
class GibbsParams:
    """Smoothing and regularization knobs for the soft alignment.

    ``gamma`` is the Gibbs temperature, ``beta`` weights the log-variance
    regularizer in composite scores, ``shift_policy`` chooses the stability
    shift applied before exponentiation (the result is shift-invariant).
    """

    gamma: float
    beta: float = 0.0
    shift_policy: str = "mean"

    def __post_init__(self):
        if not (self.gamma > 0 and np.isfinite(self.gamma)):
            raise ValueError("gamma must be a positive finite real")
        if not (self.beta >= 0 and np.isfinite(self.beta)):
            raise ValueError("beta must be a nonnegative finite real")
        if self.shift_policy not in SHIFT_POLICIES:
            raise ValueError(f"unknown shift policy {self.shift_policy!r}")


@dataclass
class AlignmentPath:
    """A monotone lattice path, 1-based index pairs from (1,1) to (tau,tau')."""

    steps: list[tuple[int, int]]

    def __post_init__(self):
        if not self.steps:
            raise ValueError("path must contain at least one cell")
        if self.steps[0] != (1, 1):
            raise ValueError("path must start at (1, 1)")
        for (m0, n0), (m1, n1) in zip(self.steps, self.steps[1:]):
            if (m1 - m0, n1 - n0) not in ((1, 0), (0, 1), (1, 1)):
                raise ValueError(f"illegal step from ({m0},{n0}) to ({m1},{n1})")

    @property
    def end(self) -> tuple[int, int]:
        return self.steps[-1]

    def indicator(self, shape: tuple[int, int]) -> np.ndarray:
        """Binary tau x tau' matrix with ones on the visited cells."""
        out = np.zeros(shape)
        for m, n in self.steps:
            out[m - 1, n - 1] = 1.0
        return out


@dataclass
class AlignmentOutcome:
    """Everything the soft alignment produces for one pair.

    ``dist`` is the Gibbs-expected precision-weighted path cost, ``omega``
    the matching expected log-variance, ``coupling`` the per-cell visit
    probabilities, and ``softmin_value`` the DP terminal value
    (-gamma * log partition), kept separate because it differs from
    ``dist`` for gamma > 0.
    """

    dist: float
    omega: float
    coupling: np.ndarray
    softmin_value: float

    def score(self, beta: float) -> float:
        return self.dist + beta * self.omega


@dataclass
class PathDistribution:
    """Oracle-only: the explicit Gibbs distribution over all admissible paths."""

    paths: list[AlignmentPath]
    costs: np.ndarray
    penalties: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        self.costs = np.asarray(self.costs, dtype=np.float64)
        self.penalties = np.asarray(self.penalties, dtype=np.float64)
        self.probabilities = np.asarray(self.probabilities, dtype=np.float64)
        n = len(self.paths)
        if not (len(self.costs) == len(self.penalties) == len(self.probabilities) == n):
            raise ValueError("path distribution arrays must share one length")


@dataclass
class LabeledSet:
    """Sequences with integer class labels."""

    items: list[tuple[Sequence, int]] = field(default_factory=list)

    def __post_init__(self):
        if not self.items:
            raise ValueError("labeled set must not be empty")
        for _, label in self.items:
            if int(label) != label:
                raise ValueError("labels must be integers")

    def __len__(self) -> int:
        return len(self.items)

    @property
    def labels(self) -> list[int]:
        return [label for _, label in self.items]

    @property
    def sequences(self) -> list[Sequence]:
        return [seq for seq, _ in self.items]

    def classes(self) -> list[int]:
        return sorted({label for _, label in self.items})
