"""q-variation norms and lambda-jump counts of finite real sequences.

The q-variation of ``a_0, ..., a_{L-1}`` is

    v_q(a) = sup (|a_{n_0}|^q + sum_k |a_{n_k} - a_{n_{k-1}}|^q)^(1/q)

over increasing index subsequences.  Prepending a virtual zero turns this into
the ordinary q-variation of the path ``(0, a_0, ..., a_{L-1})``, which is what
the dynamic program below works on.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import sparse

from .errors import ValidationError

MAX_DP_LENGTH = 2 ** 16
MAX_ORACLE_LENGTH = 20
MAX_JUMP_ORACLE_LENGTH = 14


@dataclass(frozen=True)
class ScalarSequence:
    """Real values attached to a strictly increasing index grid."""

    indices: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=float)
        vals = _as_values(self.values)
        if idx.ndim != 1 or idx.shape != vals.shape:
            raise ValidationError("indices and values must be 1-D of equal length")
        if np.any(np.diff(idx) <= 0):
            raise ValidationError("indices must be strictly increasing")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values):
        vals = _as_values(values)
        return cls(np.arange(len(vals), dtype=float), vals)

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class VariationResult:
    norm: float
    witness: tuple[int, ...]
    # norm ** q, kept to avoid a root/power round trip in comparisons
    power: float = field(repr=False)


@dataclass(frozen=True)
class JumpResult:
    count: int
    pairs: tuple[tuple[int, int], ...]


def _as_values(seq) -> np.ndarray:
    if isinstance(seq, ScalarSequence):
        return seq.values
    arr = np.asarray(seq)
    if np.iscomplexobj(arr):
        raise ValidationError("complex sequences are not supported")
    arr = arr.astype(float)
    if arr.ndim != 1:
        raise ValidationError(f"expected a 1-D sequence, got shape {arr.shape}")
    if arr.size == 0:
        raise ValidationError("sequence must be nonempty")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("sequence contains non-finite values")
    return arr


def _check_q(q):
    if not q >= 1:
        raise ValidationError(f"q must be >= 1, got {q}")


def _pow2_scale(a: np.ndarray, axis=None):
    """Power of two near max|a|; dividing by it is exact and avoids under/overflow."""
    peak = np.max(np.abs(a), axis=axis)
    _, exp = np.frexp(np.where(peak > 0, peak, 1.0))
    return np.ldexp(1.0, exp)


def witness_power(values, witness, q) -> float:
    """|a_{n_0}|^q + sum |a_{n_k} - a_{n_{k-1}}|^q along ``witness``."""
    a = _as_values(values)[list(witness)]
    return float(abs(a[0]) ** q + np.sum(np.abs(np.diff(a)) ** q))


def _turning_points(a: np.ndarray) -> list[int]:
    """Indices (into the zero-augmented path) that can carry an optimal partition.

    A point lying between its current neighbours is dropped: by convexity of
    x -> |x - u|^q + |v - x|^q, one of the neighbours does at least as well.
    """
    path = np.concatenate(([0.0], a))
    stack = [0]
    for i in range(1, len(path)):
        x = path[i]
        while len(stack) >= 2:
            lo, mid = path[stack[-2]], path[stack[-1]]
            if min(lo, x) <= mid <= max(lo, x):
                stack.pop()
            else:
                break
        stack.append(i)
    return stack


def vq_norm(seq, q: float) -> VariationResult:
    """Exact q-variation norm with an attaining subsequence.

    O(M^2) dynamic program over the M turning points of the sequence.
    """
    _check_q(q)
    a = _as_values(seq)
    if len(a) > MAX_DP_LENGTH:
        raise ValidationError(f"sequence longer than {MAX_DP_LENGTH} points")
    scale = _pow2_scale(a)
    keep = _turning_points(a)
    z = np.concatenate(([0.0], a / scale))[keep]
    m = len(z)
    best = np.zeros(m)
    back = np.zeros(m, dtype=int)
    for k in range(1, m):
        cand = best[:k] + np.abs(z[k] - z[:k]) ** q
        j = int(np.argmax(cand))
        best[k] = cand[j]
        back[k] = j
    k = int(np.argmax(best[1:])) + 1
    norm = float(best[k] ** (1.0 / q) * scale)
    power = float(best[k] * scale ** q)
    path = []
    while k > 0:
        path.append(keep[k] - 1)
        k = back[k]
    return VariationResult(norm, tuple(reversed(path)), power)


def vq_norm_batch(values, q: float) -> np.ndarray:
    """q-variation along axis 0 for every trailing position at once.

    ``values`` has shape ``(L, ...)``; returns an array of shape ``values.shape[1:]``.
    """
    _check_q(q)
    a = np.asarray(values, dtype=float)
    if a.ndim == 0 or a.shape[0] == 0:
        raise ValidationError("family must have at least one member")
    if a.shape[0] > MAX_DP_LENGTH:
        raise ValidationError(f"family longer than {MAX_DP_LENGTH} members")
    flat = a.reshape(a.shape[0], -1)
    scale = _pow2_scale(flat, axis=0)
    flat = flat / scale
    best = np.empty_like(flat)
    best[0] = np.abs(flat[0]) ** q
    for k in range(1, flat.shape[0]):
        cand = best[:k] + np.abs(flat[k] - flat[:k]) ** q
        best[k] = np.maximum(np.abs(flat[k]) ** q, cand.max(axis=0))
    out = best.max(axis=0) ** (1.0 / q) * scale
    # v_q >= sup |a| always; constant columns have v_q = |a_0| exactly
    peak = np.abs(a.reshape(flat.shape)).max(axis=0)
    out = np.maximum(out, peak)
    const = np.all(flat == flat[0], axis=0)
    out[const] = peak[const]
    return out.reshape(a.shape[1:])


@lru_cache(maxsize=None)
def _subset_incidence(n: int):
    """Rows = nonempty index subsets; columns = ordered pairs (j, k), j < k."""
    pair_col = {}
    for j in range(n):
        for k in range(j + 1, n):
            pair_col[(j, k)] = len(pair_col)
    rows, cols, first, masks = [], [], [], []
    r = 0
    for size in range(1, n + 1):
        for combo in itertools.combinations(range(n), size):
            first.append(combo[0])
            masks.append(combo)
            for j, k in zip(combo, combo[1:]):
                rows.append(r)
                cols.append(pair_col[(j, k)])
            r += 1
    inc = sparse.csr_matrix(
        (np.ones(len(rows)), (rows, cols)), shape=(r, max(len(pair_col), 1))
    )
    pj = np.array([p[0] for p in pair_col] or [0])
    pk = np.array([p[1] for p in pair_col] or [0])
    return inc, np.array(first), masks, pj, pk


def vq_norm_oracle(seq, q: float) -> VariationResult:
    """Brute force over every nonempty increasing subsequence (length <= 20)."""
    _check_q(q)
    a = _as_values(seq)
    n = len(a)
    if n > MAX_ORACLE_LENGTH:
        raise ValidationError(f"oracle limited to length {MAX_ORACLE_LENGTH}, got {n}")
    inc, first, masks, pj, pk = _subset_incidence(n)
    scale = _pow2_scale(a)
    a = a / scale
    jumps = np.abs(a[pk] - a[pj]) ** q if n > 1 else np.zeros(1)
    totals = np.abs(a[first]) ** q + inc @ jumps
    i = int(np.argmax(totals))
    norm = float(totals[i] ** (1.0 / q) * scale)
    return VariationResult(norm, tuple(masks[i]), float(totals[i] * scale ** q))


def jump_count(seq, lam: float) -> JumpResult:
    """Maximal number of disjoint lambda-jumps, by earliest-closing greedy.

    Each pair closes at the first index t admitting some s in the current
    window with |a_t - a_s| > lam; the next window starts at t.
    """
    if not lam > 0:
        raise ValidationError(f"lambda must be > 0, got {lam}")
    a = _as_values(seq)
    pairs = []
    lo_i = hi_i = 0
    for t in range(1, len(a)):
        if a[t] - a[lo_i] > lam:
            pairs.append((lo_i, t))
        elif a[hi_i] - a[t] > lam:
            pairs.append((hi_i, t))
        else:
            if a[t] < a[lo_i]:
                lo_i = t
            if a[t] > a[hi_i]:
                hi_i = t
            continue
        lo_i = hi_i = t
    return JumpResult(len(pairs), tuple(pairs))


def jump_count_batch(values, lam: float) -> np.ndarray:
    """Greedy jump counts along axis 0 for every trailing position."""
    if not lam > 0:
        raise ValidationError(f"lambda must be > 0, got {lam}")
    a = np.asarray(values, dtype=float)
    flat = a.reshape(a.shape[0], -1)
    lo = flat[0].copy()
    hi = flat[0].copy()
    count = np.zeros(flat.shape[1], dtype=np.int64)
    for t in range(1, flat.shape[0]):
        x = flat[t]
        hit = (x - lo > lam) | (hi - x > lam)
        count += hit
        lo = np.where(hit, x, np.minimum(lo, x))
        hi = np.where(hit, x, np.maximum(hi, x))
    return count.reshape(a.shape[1:])


def jump_count_oracle(seq, lam: float) -> JumpResult:
    """Exhaustive search over pair systems s_1 < t_1 <= s_2 < ... (length <= 14)."""
    if not lam > 0:
        raise ValidationError(f"lambda must be > 0, got {lam}")
    a = _as_values(seq)
    n = len(a)
    if n > MAX_JUMP_ORACLE_LENGTH:
        raise ValidationError(
            f"oracle limited to length {MAX_JUMP_ORACLE_LENGTH}, got {n}"
        )

    @lru_cache(maxsize=None)
    def best(start):
        top = ()
        for s in range(start, n):
            for t in range(s + 1, n):
                if abs(a[t] - a[s]) > lam:
                    cand = ((s, t),) + best(t)
                    if len(cand) > len(top):
                        top = cand
        return top

    pairs = best(0)
    return JumpResult(len(pairs), pairs)


@dataclass(frozen=True)
class RefinementResult:
    value: float
    grid: np.ndarray
    rounds: int
    converged: bool
    history: tuple[float, ...]


def refine_vq(
    family_evaluator: Callable[[float], float],
    coarse_grid: Sequence[float],
    q: float,
    rel_tol: float,
    *,
    geometric: bool = False,
    max_points: int = MAX_DP_LENGTH,
) -> RefinementResult:
    """Lower bound for the continuous q-variation by grid bisection.

    Midpoints (geometric midpoints if ``geometric``) are inserted until one
    bisection raises v_q by a relative amount below ``rel_tol``.  The value
    is v_q on the finest grid evaluated, which never exceeds the continuous
    norm.  ``rounds`` counts bisections that moved the value by at least
    ``rel_tol``; the final confirming bisection is not counted.
    """
    _check_q(q)
    if not rel_tol > 0:
        raise ValidationError("rel_tol must be > 0")
    grid = np.asarray(coarse_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ValidationError("grid must be nonempty and strictly increasing")
    if geometric and grid[0] <= 0:
        raise ValidationError("geometric refinement needs a positive grid")
    if grid.size > max_points:
        raise ValidationError(f"coarse grid exceeds {max_points} points")
    vals = np.array([family_evaluator(t) for t in grid], dtype=float)
    value = vq_norm(vals, q).norm
    history = [value]
    rounds = 0
    while True:
        if 2 * grid.size - 1 > max_points:
            warnings.warn(
                f"refine_vq hit the {max_points}-point cap before rel_tol={rel_tol}",
                RuntimeWarning,
                stacklevel=2,
            )
            return RefinementResult(value, grid, rounds, False, tuple(history))
        if grid.size == 1:
            return RefinementResult(value, grid, rounds, True, tuple(history))
        if geometric:
            mids = np.sqrt(grid[:-1] * grid[1:])
        else:
            mids = 0.5 * (grid[:-1] + grid[1:])
        mid_vals = np.array([family_evaluator(t) for t in mids], dtype=float)
        new_grid = np.empty(2 * grid.size - 1)
        new_grid[0::2], new_grid[1::2] = grid, mids
        new_vals = np.empty_like(new_grid)
        new_vals[0::2], new_vals[1::2] = vals, mid_vals
        new_value = vq_norm(new_vals, q).norm
        history.append(new_value)
        grid, vals = new_grid, new_vals
        increase = new_value - value
        small = increase <= rel_tol * value if value > 0 else new_value == 0
        value = new_value
        if small:
            return RefinementResult(value, grid, rounds, True, tuple(history))
        rounds += 1


__all__ = [
    "ScalarSequence",
    "VariationResult",
    "JumpResult",
    "RefinementResult",
    "vq_norm",
    "vq_norm_batch",
    "vq_norm_oracle",
    "jump_count",
    "jump_count_batch",
    "jump_count_oracle",
    "refine_vq",
    "witness_power",
]
