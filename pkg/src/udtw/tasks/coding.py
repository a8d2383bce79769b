"""Dictionary coding of sequences under the alignment distance.

Codes are softmax weights over the nearest atoms (locality-constrained
soft assignment); atoms are refined by gradient steps on the distance
between each sequence and its code-weighted reconstruction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..alignment import align
from ..gradients import udtw_grad_sequence
from ..types import GibbsParams, Sequence, VarianceField

__all__ = [
    "Dictionary",
    "atoms_from_samples",
    "lcsa_code",
    "reconstruction_distance",
    "dict_update",
    "hik_score",
]


@dataclass
class Dictionary:
    atoms: list[Sequence]
    k_nearest: int
    gamma_prime: float = 0.7
    lambda_dl: float = 0.001
    dict_iters: int = 10

    def __post_init__(self):
        if not self.atoms:
            raise ValueError("dictionary must hold at least one atom")
        shapes = {a.values.shape for a in self.atoms}
        if len(shapes) != 1:
            raise ValueError("atoms must share one length and feature dimension")
        if not 1 <= self.k_nearest <= len(self.atoms):
            raise ValueError(
                f"k_nearest must be in [1, {len(self.atoms)}], got {self.k_nearest}"
            )
        if not self.gamma_prime > 0:
            raise ValueError("gamma_prime must be positive")
        if self.lambda_dl < 0:
            raise ValueError("lambda_dl must be nonnegative")

    @property
    def size(self) -> int:
        return len(self.atoms)


def atoms_from_samples(
    data: list[Sequence],
    k: int,
    atom_length: int | None = None,
    seed: int | None = None,
    **kwargs,
) -> Dictionary:
    """Initialize atoms by resampling k randomly chosen training sequences."""
    from ..barycenter import resample_sequence

    if k > len(data):
        raise ValueError(f"cannot draw {k} atoms from {len(data)} sequences")
    rng = np.random.default_rng(seed)
    length = atom_length or int(round(np.mean([s.length for s in data])))
    picks = rng.choice(len(data), size=k, replace=False)
    atoms = [Sequence(resample_sequence(data[i].values, length)) for i in picks]
    return Dictionary(atoms=atoms, **kwargs)


def _atom_distances(s: Sequence, dictionary: Dictionary, p: GibbsParams) -> np.ndarray:
    return np.array([align(s, atom, p).dist for atom in dictionary.atoms])


def lcsa_code(s: Sequence, dictionary: Dictionary, p: GibbsParams) -> np.ndarray:
    """Softmax code over the k nearest atoms; zero elsewhere; sums to one."""
    dists = _atom_distances(s, dictionary, p)
    nearest = np.argsort(dists, kind="stable")[: dictionary.k_nearest]
    shifted = dists[nearest] - dists[nearest].min()
    weights = np.exp(-shifted / dictionary.gamma_prime)
    alpha = np.zeros(dictionary.size)
    alpha[nearest] = weights / weights.sum()
    return alpha


def _reconstruction(alpha: np.ndarray, dictionary: Dictionary) -> Sequence:
    stack = np.stack([a.values for a in dictionary.atoms])
    return Sequence(np.einsum("k,kdt->dt", alpha, stack))


def reconstruction_distance(
    batch: list[Sequence], dictionary: Dictionary, p: GibbsParams
) -> float:
    """Mean alignment distance between items and their coded reconstructions."""
    dists = [
        align(s, _reconstruction(lcsa_code(s, dictionary, p), dictionary), p).dist
        for s in batch
    ]
    return float(np.mean(dists))


def dict_update(
    batch: list[Sequence], dictionary: Dictionary, p: GibbsParams
) -> Dictionary:
    """Refine atoms by dict_iters rounds of coded-reconstruction descent.

    Codes are recomputed each round and treated as constants; the gradient
    of each reconstruction distributes onto the atoms with the code weights.
    """
    if not batch:
        raise ValueError("batch must not be empty")
    atoms = [Sequence(a.values.copy(), name=a.name) for a in dictionary.atoms]
    current = replace(dictionary, atoms=atoms)
    for _ in range(dictionary.dict_iters):
        grads = [np.zeros_like(a.values) for a in current.atoms]
        for s in batch:
            alpha = lcsa_code(s, current, p)
            recon = _reconstruction(alpha, current)
            field = VarianceField.unit((s.length, recon.length))
            g_recon = udtw_grad_sequence(s, recon, field, p, mode="detached")
            for k in range(current.size):
                if alpha[k] != 0.0:
                    grads[k] += alpha[k] * g_recon
        for atom, grad in zip(current.atoms, grads):
            atom.values -= dictionary.lambda_dl * grad
            if not np.all(np.isfinite(atom.values)):
                raise RuntimeError(
                    "dictionary update produced non-finite atoms; "
                    "reduce lambda_dl or check the batch scale"
                )
    return current


def hik_score(alpha_a: np.ndarray, alpha_b: np.ndarray) -> float:
    """Histogram intersection: sum of entrywise minima of two code vectors."""
    a = np.asarray(alpha_a, dtype=np.float64).ravel()
    b = np.asarray(alpha_b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError("code vectors must share one length")
    if np.any(a < 0) or np.any(b < 0):
        raise ValueError("code vectors must be nonnegative")
    return float(np.minimum(a, b).sum())
