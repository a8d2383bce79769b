"""Seeded synthetic generators so experiments need no external data."""

from __future__ import annotations

import numpy as np

from .types import LabeledSet, Sequence

__all__ = ["make_cbf", "make_sine_step", "make_shifted_bells"]


def make_cbf(n_per_class: int, length: int = 128, seed: int = 0) -> LabeledSet:
    """Cylinder/bell/funnel three-class set; labels 0, 1, 2.

    Classic construction: a noisy plateau over a random window [a, b],
    shaped flat, rising, or falling.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)
    items = []
    for label in (0, 1, 2):
        for _ in range(n_per_class):
            a = rng.integers(16, 33)
            b = a + rng.integers(32, 97)
            b = min(b, length - 1)
            eta = rng.normal()
            eps = rng.normal(size=length)
            window = ((t >= a) & (t <= b)).astype(np.float64)
            if label == 0:
                shape = window
            elif label == 1:
                shape = window * (t - a) / (b - a)
            else:
                shape = window * (b - t) / (b - a)
            items.append((Sequence((6.0 + eta) * shape + eps), label))
    return LabeledSet(items)


def make_sine_step(n: int, length: int = 100, seed: int = 0) -> list[Sequence]:
    """Sinusoids with one abrupt late level shift.

    The shift's timing, size, and sign are functions of the sinusoid
    parameters, so the continuation is identifiable from a clean prefix.
    """
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)
    out = []
    for _ in range(n):
        amp = rng.uniform(0.8, 1.2)
        cycles = rng.uniform(1.0, 3.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        step_at = int(length * (0.65 + 0.2 * (cycles - 1.0) / 2.0))
        step = 1.5 * amp * np.sign(np.cos(phase))
        values = amp * np.sin(2 * np.pi * cycles * t / length + phase)
        values = values + step * (t >= step_at)
        out.append(Sequence(values))
    return out


def make_shifted_bells(n: int = 10, length: int = 64, seed: int = 0) -> list[Sequence]:
    """Time-shifted copies of one Gaussian bump plus light noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(length, dtype=np.float64)
    width = length / 10.0
    out = []
    for _ in range(n):
        center = length * rng.uniform(0.3, 0.7)
        amp = rng.uniform(0.9, 1.1)
        values = amp * np.exp(-0.5 * ((t - center) / width) ** 2)
        values = values + 0.02 * rng.normal(size=length)
        out.append(Sequence(values))
    return out
