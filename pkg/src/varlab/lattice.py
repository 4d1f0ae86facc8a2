"""Atomic measure spaces and lattice-valued functions on Omega x Sigma.

A function f in L^p(Omega; L^r(Sigma)) is stored as a matrix indexed by
(omega atom, sigma atom).  Families of such functions are stacked along a
leading time/index axis.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .variation import vq_norm_batch


@dataclass(frozen=True, eq=False)
class MeasureSpace:
    weights: np.ndarray
    points: tuple = ()

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0:
            raise ValidationError("measure needs a nonempty 1-D weight vector")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValidationError("measure weights must be finite and > 0")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        pts = tuple(self.points) if self.points else tuple(range(w.size))
        if len(pts) != w.size:
            raise ValidationError("one label per atom required")
        object.__setattr__(self, "points", pts)

    @classmethod
    def counting(cls, n: int) -> "MeasureSpace":
        return cls(np.ones(n))

    @classmethod
    def probability(cls, n: int) -> "MeasureSpace":
        return cls(np.full(n, 1.0 / n))

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __eq__(self, other):
        return isinstance(other, MeasureSpace) and np.array_equal(
            self.weights, other.weights
        )

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True, eq=False)
class LatticeFunction:
    omega: MeasureSpace
    sigma: MeasureSpace
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim == 1 and self.sigma.size == 1:
            v = v[:, None]
        if v.shape != (self.omega.size, self.sigma.size):
            raise ValidationError(
                f"values shape {v.shape} does not match spaces "
                f"({self.omega.size}, {self.sigma.size})"
            )
        if not np.all(np.isfinite(v)):
            raise ValidationError("lattice function has non-finite entries")
        object.__setattr__(self, "values", v)

    def with_values(self, values) -> "LatticeFunction":
        return LatticeFunction(self.omega, self.sigma, values)


@dataclass(frozen=True, eq=False)
class LatticeFamily:
    grid: np.ndarray
    omega: MeasureSpace
    sigma: MeasureSpace
    values: np.ndarray  # shape (len(grid), |Omega|, |Sigma|)

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.size == 0:
            raise ValidationError("family grid must be nonempty")
        if np.any(np.diff(g) <= 0):
            raise ValidationError("family grid must be strictly increasing")
        if v.shape != (g.size, self.omega.size, self.sigma.size):
            raise ValidationError(f"family values have shape {v.shape}")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_members(cls, grid, members: Sequence[LatticeFunction]) -> "LatticeFamily":
        if not members:
            raise ValidationError("family must have at least one member")
        om, sg = members[0].omega, members[0].sigma
        for f in members[1:]:
            if f.omega != om or f.sigma != sg:
                raise ValidationError("family members live on different spaces")
        return cls(grid, om, sg, np.stack([f.values for f in members]))

    def __len__(self):
        return self.grid.size

    def member(self, i: int) -> LatticeFunction:
        return LatticeFunction(self.omega, self.sigma, self.values[i])


def _check_exponents(p, r):
    if not p > 1:
        raise ValidationError(f"p must be > 1, got {p}")
    if not r >= 1:
        raise ValidationError(f"r must be >= 1, got {r}")


def pointwise_mixed_norm(values: np.ndarray, omega: MeasureSpace, sigma: MeasureSpace,
                         p: float, r: float) -> float:
    """(sum_w mu(w) (sum_s nu(s) |v(w,s)|^r)^(p/r))^(1/p) for a raw matrix."""
    v = np.abs(np.asarray(values, dtype=float))
    if v.shape != (omega.size, sigma.size):
        raise ValidationError(f"shape {v.shape} does not match the measure spaces")
    # factor out the peak so large or tiny entries do not overflow
    peak = v.max()
    if peak == 0:
        return 0.0
    v = v / peak
    inner = (v ** r) @ sigma.weights
    return float(peak * (omega.weights @ inner ** (p / r)) ** (1.0 / p))


def mixed_norm(f: LatticeFunction, p: float, r: float) -> float:
    """Norm of f in L^p(Omega; L^r(Sigma))."""
    _check_exponents(p, r)
    return pointwise_mixed_norm(f.values, f.omega, f.sigma, p, r)


def lattice_variation_norm(fam: LatticeFamily, p: float, q: float, r: float) -> float:
    """v_q in the family index, then L^r in sigma, then L^p in omega."""
    _check_exponents(p, r)
    pointwise = vq_norm_batch(fam.values, q)
    return pointwise_mixed_norm(pointwise, fam.omega, fam.sigma, p, r)


def lattice_maximal_norm(fam: LatticeFamily, p: float, r: float) -> float:
    """sup over the family index, then L^r in sigma, then L^p in omega."""
    _check_exponents(p, r)
    pointwise = np.abs(fam.values).max(axis=0)
    return pointwise_mixed_norm(pointwise, fam.omega, fam.sigma, p, r)


def umd_regime(r: float) -> str:
    return "UMD regime" if r > 1 else "non-UMD probe"
