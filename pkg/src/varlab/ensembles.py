"""Seeded test-function ensembles on Omega x Sigma.

Member i draws from its own stream ``SeedSequence([seed, i])``, so members
can be generated in any order or in parallel with identical results.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError

GENERATORS = ("gaussian", "rademacher", "spikes", "low_frequency")
# "delta" is the deterministic probe f = e_0 in every sigma column
ENSEMBLE_CHOICES = GENERATORS + ("all", "delta")


def member_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


def gaussian(rng, shape):
    return rng.standard_normal(shape)


def rademacher(rng, shape):
    return rng.choice(np.array([-1.0, 1.0]), size=shape)


def spikes(rng, shape):
    """One to three signed spikes per sigma column at random omega atoms."""
    n, d = shape
    out = np.zeros(shape)
    for col in range(d):
        k = int(rng.integers(1, min(3, n) + 1))
        where = rng.choice(n, size=k, replace=False)
        out[where, col] = rng.choice(np.array([-1.0, 1.0]), size=k) * rng.uniform(0.5, 1.5, size=k)
    return out


def low_frequency(rng, shape):
    """Sum of the three lowest cyclic modes with random amplitudes and phases."""
    n, d = shape
    j = np.arange(n)[:, None]
    out = np.zeros(shape)
    for k in (1, 2, 3):
        amp = rng.standard_normal(d)
        phase = rng.uniform(0, 2 * np.pi, d)
        out += amp * np.cos(2 * np.pi * k * j / n + phase)
    return out


def delta(rng, shape):
    out = np.zeros(shape)
    out[0] = 1.0
    return out


_DRAW = {"delta": delta, "gaussian": gaussian, "rademacher": rademacher, "spikes": spikes,
         "low_frequency": low_frequency}


def arm_of(generator: str, index: int) -> str:
    """Generator used for member ``index``; ``all`` interleaves the four arms."""
    if generator == "all":
        return GENERATORS[index % len(GENERATORS)]
    if generator not in _DRAW:
        raise ValidationError(f"unknown ensemble generator {generator!r}; choose from {ENSEMBLE_CHOICES}")
    return generator


def draw_member(generator: str, seed: int, index: int, shape) -> np.ndarray:
    arm = arm_of(generator, index)
    values = _DRAW[arm](member_rng(seed, index), tuple(shape))
    if not np.any(values):
        # a degenerate draw would make every ratio 0/0
        values = values.copy()
        values[0, 0] = 1.0
    return values
