"""Discrete Hilbert transform and Muckenhoupt A_p characteristics on segments of Z."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .variation import ScalarSequence

DEFAULT_MAX_LEN = 512


@dataclass(frozen=True)
class Weight:
    """Positive weight on the integer segment offset, ..., offset + len - 1."""

    values: np.ndarray
    offset: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise ValidationError("weight needs a nonempty 1-D array")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValidationError("weight values must be finite and > 0")
        if int(self.offset) != self.offset:
            raise ValidationError("weight offset must be an integer")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "offset", int(self.offset))

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + self.values.size)

    def scaled(self, c: float) -> "Weight":
        return Weight(c * self.values, self.offset)

    @classmethod
    def from_function(cls, fn, lo: int, hi: int) -> "Weight":
        """Sample fn on lo, ..., hi inclusive."""
        n = np.arange(lo, hi + 1)
        return cls(np.asarray(fn(n), dtype=float), lo)


def discrete_hilbert(a, offset: int = 0, margin: int | None = None) -> ScalarSequence:
    """H a(m) = sum_{n != m} a_n / (n - m) for a supported on offset, ..., offset + len - 1.

    The output window is the support extended by ``margin`` points on each side
    (default: the support length).  Every output value is an exact finite sum;
    the window only decides where the transform is reported.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 1 or a.size == 0 or not np.all(np.isfinite(a)):
        raise ValidationError("discrete_hilbert needs a finite nonempty 1-D sequence")
    margin = a.size if margin is None else int(margin)
    if margin < 0:
        raise ValidationError("margin must be >= 0")
    m = np.arange(offset - margin, offset + a.size + margin)
    # terms paired as (a_{m+d} - a_{m-d}) / d: symmetric data cancel exactly
    reach = a.size + margin
    padded = np.concatenate((np.zeros(reach + margin), a, np.zeros(reach + margin)))
    centre = np.arange(m.size) + reach
    out = np.zeros(m.size)
    for d in range(1, reach + 1):
        out += (padded[centre + d] - padded[centre - d]) / d
    return ScalarSequence(m.astype(float), out)


@dataclass(frozen=True)
class ApCharacteristic:
    value: float
    start: int  # integer index of the maximizing interval's left end
    length: int
    max_len: int


def ap_characteristic_detail(w: Weight, p: float, max_len: int = DEFAULT_MAX_LEN) -> ApCharacteristic:
    """Sup over intervals I of length <= max_len of <w>_I <w^(1-p')>_I^(p-1).

    Intervals are enumerated exhaustively with prefix sums.  The weight is
    normalized by its maximum first; the characteristic is scale invariant and
    a constant weight then yields exactly 1.
    """
    if not p > 1:
        raise ValidationError(f"A_p needs p > 1, got {p}")
    if int(max_len) != max_len or max_len < 1:
        raise ValidationError("max_len must be a positive integer")
    max_len = int(max_len)
    u = w.values / w.values.max()
    with np.errstate(over="ignore", divide="ignore"):
        dual = u ** (-1.0 / (p - 1.0))
        ratio = w.values.max() / w.values.min()
    if not np.all(np.isfinite(dual)) or dual.max() > 1e300 / u.size:
        raise OverflowError(
            f"A_{p:g} characteristic overflows: weight ratio max/min = {ratio:.3g}"
        )
    # sums of deviations from 1 are exact zeros for constant weights
    su = np.concatenate(([0.0], np.cumsum(u - 1.0)))
    sd = np.concatenate(([0.0], np.cumsum(dual - 1.0)))
    best, where = -np.inf, (0, 1)
    for length in range(1, min(max_len, u.size) + 1):
        avg_u = 1.0 + (su[length:] - su[:-length]) / length
        avg_d = 1.0 + (sd[length:] - sd[:-length]) / length
        vals = avg_u * avg_d ** (p - 1.0)
        i = int(np.argmax(vals))
        if vals[i] > best:
            best, where = float(vals[i]), (i, length)
    return ApCharacteristic(best, w.offset + where[0], where[1], max_len)


def ap_characteristic(w: Weight, p: float, max_len: int = DEFAULT_MAX_LEN) -> float:
    return ap_characteristic_detail(w, p, max_len).value


@dataclass(frozen=True)
class ApTrend:
    windows: tuple
    values: tuple
    finite: bool  # False when the characteristic keeps growing with the window


def ap_trend(fn, p: float, half_widths=(16, 32, 64, 128, 256), rel_tol: float = 0.02) -> ApTrend:
    """Characteristic of fn restricted to [-h, h] for growing h.

    Flagged as not finite when the last doubling still raises the value by
    more than ``rel_tol``.
    """
    hw = sorted(int(h) for h in half_widths)
    if len(hw) < 2:
        raise ValidationError("trend needs at least two windows")
    vals = [ap_characteristic(Weight.from_function(fn, -h, h), p, max_len=2 * h + 1) for h in hw]
    finite = vals[-1] <= vals[-2] * (1 + rel_tol)
    return ApTrend(tuple(hw), tuple(vals), bool(finite))
