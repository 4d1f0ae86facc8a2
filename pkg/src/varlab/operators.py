"""Operator families: averages on Z_N and R, regular kernels, matrix semigroups.

Kernels act on the Omega index of a lattice function, column by column in
Sigma: (Tf)(i, s) = sum_j K(i, j) f(j, s).
"""

from __future__ import annotations

import re
import threading
import warnings
from dataclasses import dataclass, field
from math import comb

import numpy as np
from scipy.integrate import quad_vec

from .errors import (
    ApproximationWarning,
    ConvergenceError,
    NotDiagonalizableError,
    TruncationWarning,
    ValidationError,
)
from .lattice import LatticeFamily, LatticeFunction, MeasureSpace
from .linalg import expm, operator_norm

CERT_TOL = 1e-12
TAIL_RATIO_LIMIT = 1e-6


# --- domain types -------------------------------------------------------------

@dataclass(frozen=True)
class Certificates:
    l1_contractive: bool
    linf_contractive: bool
    analyticity_index_N: float | None = None
    N_used: int | None = None

    @property
    def contractively_regular(self) -> bool:
        return self.l1_contractive and self.linf_contractive


@dataclass(frozen=True, eq=False)
class RegularOperator:
    space: MeasureSpace
    kernel: np.ndarray
    certificates: Certificates
    name: str = "kernel"

    def apply(self, values: np.ndarray) -> np.ndarray:
        return self.kernel @ values

    def __call__(self, f: LatticeFunction) -> LatticeFunction:
        _check_space(f, self.space)
        return f.with_values(self.kernel @ f.values)

    @property
    def size(self) -> int:
        return self.space.size


@dataclass(frozen=True)
class DeltaSpec:
    m: int
    n: int

    def __post_init__(self):
        if self.m < 0 or self.n < 0:
            raise ValidationError("DeltaSpec needs m >= 0 and n >= 0")


@dataclass(eq=False)
class Generator:
    """Matrix A of the semigroup T_t = exp(-tA), with a thread-safe cache."""

    space: MeasureSpace
    matrix: np.ndarray
    name: str = "generator"
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def __post_init__(self):
        a = np.asarray(self.matrix, dtype=float)
        if a.shape != (self.space.size, self.space.size):
            raise ValidationError("generator shape does not match its space")
        if not np.all(np.isfinite(a)):
            raise ValidationError("generator has non-finite entries")
        self.matrix = a

    def semigroup(self, t: float, cache: bool = True) -> np.ndarray:
        if not t >= 0:
            raise ValidationError(f"semigroup time must be >= 0, got {t}")
        t = float(t)
        hit = self._cache.get(t)
        if hit is not None:
            return hit
        mat = expm(-t * self.matrix)
        mat.setflags(write=False)
        if cache:
            with self._lock:
                mat = self._cache.setdefault(t, mat)
        return mat

    def as_operator(self, t: float) -> RegularOperator:
        return build_regular_operator(self.semigroup(t), self.space, name=f"{self.name}@t={t!r}")

    @property
    def size(self) -> int:
        return self.space.size


def _check_space(f: LatticeFunction, space: MeasureSpace):
    if f.omega != space:
        raise ValidationError("function and operator live on different measure spaces")


def _kernel_of(op) -> np.ndarray:
    if isinstance(op, RegularOperator):
        return op.kernel
    return np.asarray(op, dtype=float)


# --- certificates ---------------------------------------------------------------

def build_regular_operator(kernel, space: MeasureSpace, name: str = "kernel") -> RegularOperator:
    """Wrap a kernel and certify L^1 / L^inf contraction of |K|.

    L^1(mu): sum_i mu_i |K(i,j)| <= mu_j for every j.
    L^inf:   sum_j |K(i,j)| <= 1 for every i.
    Flags are compared with a 1e-12 relative slack so that exactly stochastic
    matrices pass despite rounding.
    """
    k = np.array(kernel, dtype=float)
    if k.shape != (space.size, space.size):
        raise ValidationError(f"kernel shape {k.shape} does not match space of size {space.size}")
    if not np.all(np.isfinite(k)):
        raise ValidationError("kernel has non-finite entries")
    k.setflags(write=False)
    return RegularOperator(space, k, _certify(k, space.weights), name)


def _certify(k, w) -> Certificates:
    absk = np.abs(k)
    l1 = bool(np.all(w @ absk <= w * (1 + CERT_TOL)))
    linf = bool(np.all(absk.sum(axis=1) <= 1 + CERT_TOL))
    return Certificates(l1, linf)


def recompute_certificates(op: RegularOperator) -> Certificates:
    return _certify(op.kernel, op.space.weights)


def analyticity_profile(op: RegularOperator, p: float, N: int) -> np.ndarray:
    """n * ||T^n - T^(n-1)||_{L^p -> L^p} for n = 1..N."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    k = op.kernel
    w = op.space.weights
    prev = np.eye(op.size)
    cur = k.copy()
    out = np.empty(N)
    for n in range(1, N + 1):
        out[n - 1] = n * operator_norm(cur - prev, w, p).value
        prev, cur = cur, cur @ k
    return out


def analyticity_index(op: RegularOperator, p: float, N: int) -> float:
    """max over 1 <= n <= N of n * ||T^n - T^(n-1)||_p."""
    return float(analyticity_profile(op, p, N).max())


def analyticity_trend_flat(op: RegularOperator, p: float, N: int) -> tuple[bool, float, float]:
    """Compare the index over [1, N/2] and [1, N]; linear growth doubles it."""
    prof = analyticity_profile(op, p, N)
    half = float(prof[: max(N // 2, 1)].max())
    full = float(prof.max())
    flat = full <= 1.5 * half or full == 0.0
    return flat, half, full


def with_analyticity(op: RegularOperator, p: float, N: int) -> RegularOperator:
    c = op.certificates
    certs = Certificates(c.l1_contractive, c.linf_contractive, analyticity_index(op, p, N), N)
    return RegularOperator(op.space, op.kernel, certs, op.name)


# --- averages -------------------------------------------------------------------

def averaging_Z(f: LatticeFunction, n: int) -> LatticeFunction:
    """A_n f(j) = (1/(n+1)) sum_{k=0}^n f(j+k), indices mod N."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    acc = f.values.copy()
    for k in range(1, n + 1):
        acc = acc + np.roll(f.values, -k, axis=0)
    return f.with_values(acc / (n + 1))


def averages_Z_family(f: LatticeFunction, n_max: int) -> LatticeFamily:
    """(A_n f) for n = 0..n_max, sharing the running sums."""
    if n_max < 0:
        raise ValidationError("n_max must be >= 0")
    out = np.empty((n_max + 1,) + f.values.shape)
    acc = f.values.copy()
    out[0] = acc
    for k in range(1, n_max + 1):
        acc = acc + np.roll(f.values, -k, axis=0)
        out[k] = acc / (k + 1)
    return LatticeFamily(np.arange(n_max + 1.0), f.omega, f.sigma, out)


def averaging_R_sampled(samples, h: float, t: float, start: float = 0.0):
    """(1/t) int_0^t f(s + r) dr by the trapezoid rule on a grid of step h.

    ``samples[i] = f(start + i*h)`` along axis 0.  A window ending between two
    samples uses the linear interpolant on the last partial panel, so the rule
    is exact on affine f and O(h^2) for C^2 f.  Returns (s, A_t f(s)) for the
    s whose window fits inside the sampled range.
    """
    y = np.asarray(samples, dtype=float)
    if not h > 0:
        raise ValidationError("h must be > 0")
    if t < h:
        raise ValidationError(f"window t={t} is shorter than the grid step h={h}")
    full = int(np.floor(t / h + 1e-12))
    frac = t - full * h
    if frac < 1e-12 * h:
        frac = 0.0
    need = full + (1 if frac > 0 else 0)
    count = y.shape[0] - need
    if count <= 0:
        raise ValidationError("sample grid is shorter than the averaging window")
    acc = 0.5 * (y[:count] + y[full:full + count])
    for k in range(1, full):
        acc = acc + y[k:k + count]
    integral = h * acc
    if frac > 0:
        left = y[full:full + count]
        right = y[full + 1:full + 1 + count]
        integral = integral + 0.5 * frac * (2 * left + (frac / h) * (right - left))
    s = start + h * np.arange(count)
    return s, integral / t


# --- semigroups and ergodic averages --------------------------------------------

def semigroup_eval(g: Generator, t: float, f: LatticeFunction) -> LatticeFunction:
    _check_space(f, g.space)
    return f.with_values(g.semigroup(t) @ f.values)


def semigroup_family(g: Generator, f: LatticeFunction, grid) -> LatticeFamily:
    grid = np.asarray(grid, dtype=float)
    _check_space(f, g.space)
    vals = np.stack([g.semigroup(t) @ f.values for t in grid])
    return LatticeFamily(grid, f.omega, f.sigma, vals)


def ergodic_average_discrete(op: RegularOperator, n: int, f: LatticeFunction) -> LatticeFunction:
    """M_n(T) f via M_n = (n M_{n-1} + T^n f) / (n + 1)."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    _check_space(f, op.space)
    return f.with_values(ergodic_family(op, f, n).values[-1])


def ergodic_family(op: RegularOperator, f: LatticeFunction, n_max: int) -> LatticeFamily:
    _check_space(f, op.space)
    out = np.empty((n_max + 1,) + f.values.shape)
    power = f.values
    avg = f.values
    out[0] = avg
    for n in range(1, n_max + 1):
        power = op.kernel @ power
        avg = (n * avg + power) / (n + 1)
        out[n] = avg
    return LatticeFamily(np.arange(n_max + 1.0), f.omega, f.sigma, out)


def ergodic_average_continuous(g: Generator, t: float, f: LatticeFunction, tol: float = 1e-10,
                               full_output: bool = False, max_depth: int = 48):
    """M_t f = (1/t) int_0^t T_s f ds by adaptive Simpson quadrature.

    ``tol`` bounds the sup-norm error of the average.  With ``full_output``
    also returns a dict holding the estimated error and evaluation count.
    """
    if not t > 0:
        raise ValidationError("t must be > 0")
    _check_space(f, g.space)
    fv = f.values

    # integrate T_s f - f: exact zero when the semigroup fixes f
    def F(s):
        return g.semigroup(s, cache=False) @ fv - fv

    evals = 3
    a, b = 0.0, float(t)
    fa, fm, fb = F(a), F(0.5 * t), F(b)
    whole = (b - a) / 6 * (fa + 4 * fm + fb)
    stack = [(a, b, fa, fm, fb, whole, tol * t, 0)]
    total = np.zeros_like(fv)
    err = 0.0
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        flm, frm = F(0.5 * (a + m)), F(0.5 * (m + b))
        evals += 2
        left = (m - a) / 6 * (fa + 4 * flm + fm)
        right = (b - m) / 6 * (fm + 4 * frm + fb)
        diff = left + right - whole
        delta = float(np.max(np.abs(diff))) if diff.size else 0.0
        if delta <= 15 * eps or depth >= max_depth:
            if delta > 15 * eps:
                raise ConvergenceError(
                    f"adaptive Simpson exceeded depth {max_depth} (local error {delta / 15:.3g})"
                )
            total += left + right + diff / 15
            err += delta / 15
            continue
        stack.append((m, b, fm, frm, fb, right, eps / 2, depth + 1))
        stack.append((a, m, fa, flm, fm, left, eps / 2, depth + 1))
    out = f.with_values(fv + total / t)
    if full_output:
        return out, {"error_estimate": err / t, "evaluations": evals}
    return out


# --- differences and square functions -------------------------------------------

def delta_power(op, spec: DeltaSpec, f: LatticeFunction) -> LatticeFunction:
    """Delta_n^m f = T^n (T - I)^m f."""
    k = _kernel_of(op)
    v = f.values
    for _ in range(spec.m):
        v = k @ v - v
    for _ in range(spec.n):
        v = k @ v
    return f.with_values(v)


def delta_family(op, f: LatticeFunction, m: int, n_max: int, n_min: int = 1) -> LatticeFamily:
    """(n^m Delta_n^m f) for n = n_min..n_max."""
    k = _kernel_of(op)
    d = f.values
    for _ in range(m):
        d = k @ d - d
    for _ in range(n_min):
        d = k @ d
    out = np.empty((n_max - n_min + 1,) + d.shape)
    for i, n in enumerate(range(n_min, n_max + 1)):
        out[i] = float(n) ** m * d
        d = k @ d
    return LatticeFamily(np.arange(n_min, n_max + 1.0), f.omega, f.sigma, out)


def powers_family(op, f: LatticeFunction, n_max: int, n_min: int = 1) -> LatticeFamily:
    return delta_family(op, f, 0, n_max, n_min)


@dataclass(frozen=True)
class SquareFunctionResult:
    values: LatticeFunction
    tail_ratio: float
    tail_bound: float
    certified: bool
    info: dict = field(default_factory=dict)


def _square_terms(k, fv, m, n_max):
    """Pointwise (n+1)^(2m+1) |Delta_n^(m+1) f|^2 for n = 0..n_max, plus sup norms."""
    d = fv
    for _ in range(m + 1):
        d = k @ d - d
    terms = np.empty((n_max + 1,) + fv.shape)
    sups = np.empty(n_max + 2)
    for n in range(n_max + 1):
        terms[n] = float(n + 1) ** (2 * m + 1) * d ** 2
        sups[n] = np.max(np.abs(d))
        d = k @ d
    sups[n_max + 1] = np.max(np.abs(d))
    return terms, sups


def _geometric_tail(sup_next, rho, m, n_max):
    """Sum over n > n_max of (n+1)^(2m+1) (rho^(n-n_max-1) sup_next)^2."""
    if sup_next == 0:
        return 0.0
    if not rho < 1:
        return np.inf
    total, n, c = 0.0, n_max + 1, sup_next ** 2
    while True:
        term = float(n + 1) ** (2 * m + 1) * c
        total += term
        if term <= 1e-18 * total or n > n_max + 10 ** 7:
            return total
        c *= rho * rho
        n += 1


def square_function_discrete(op, f: LatticeFunction, m: int, N_max: int) -> SquareFunctionResult:
    """Pointwise (sum_{n<=N_max} (1/(n+1)) |(n+1)^(m+1) Delta_n^(m+1) f|^2)^(1/2).

    For m = 0 this is (sum (n+1) |T^(n+1) f - T^n f|^2)^(1/2).  ``tail_ratio``
    is the largest pointwise last-term/total ratio.  ``tail_bound`` bounds the
    pointwise change from extending the sum to infinity, using ||T||_inf when
    it is < 1 (certified) or the observed decay rate of the terms otherwise.
    """
    if m < 0:
        raise ValidationError("m must be >= 0")
    if N_max < 1:
        raise ValidationError("N_max must be >= 1")
    k = _kernel_of(op)
    terms, sups = _square_terms(k, f.values, m, N_max)
    total = terms.sum(axis=0)
    nz = total > 0
    tail_ratio = float(np.max(terms[-1][nz] / total[nz])) if np.any(nz) else 0.0
    norm_inf = float(np.abs(k).sum(axis=1).max())
    certified = norm_inf < 1
    if certified:
        rho = norm_inf
    else:
        q0 = max(1, (3 * (N_max + 1)) // 4)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = sups[q0 + 1:] / sups[q0:-1]
        ratios = ratios[np.isfinite(ratios)]
        rho = float(ratios.max()) if ratios.size else 0.0
    tail = _geometric_tail(sups[-1], rho, m, N_max)
    if tail_ratio > TAIL_RATIO_LIMIT:
        warnings.warn(
            f"square function tail ratio {tail_ratio:.3g} exceeds {TAIL_RATIO_LIMIT} at N_max={N_max}",
            TruncationWarning,
            stacklevel=2,
        )
    return SquareFunctionResult(
        f.with_values(np.sqrt(total)), tail_ratio, float(np.sqrt(tail)), certified,
        {"rho": rho, "N_max": N_max},
    )


def observation_sums(g: Generator, t: float, f: LatticeFunction, m: int, N: int):
    """Both sides of the doubling comparison, truncated consistently.

    Returns pointwise (sum_{n<=N} n^(2m+1) |Delta_n^(m+1)(T_2t) f|^2)^(1/2)
    and (sum_{n<=2N+m+1} n^(2m+1) |Delta_n^(m+1)(T_t) f|^2)^(1/2), plus the
    largest last-term/total ratio of either sum.
    """
    def weighted(kernel, n_top):
        d = f.values
        for _ in range(m + 1):
            d = kernel @ d - d
        acc = np.zeros_like(d)
        last = None
        for n in range(n_top + 1):
            last = float(n) ** (2 * m + 1) * d ** 2
            acc += last
            d = kernel @ d
        nz = acc > 0
        ratio = float(np.max(last[nz] / acc[nz])) if np.any(nz) else 0.0
        return np.sqrt(acc), ratio

    lhs, r1 = weighted(g.semigroup(2 * t), N)
    rhs, r2 = weighted(g.semigroup(t), 2 * N + m + 1)
    return lhs, rhs, max(r1, r2)


def square_function_continuous(g: Generator, f: LatticeFunction, m: int,
                               quad_tol: float = 1e-12) -> SquareFunctionResult:
    """Pointwise (int_0^inf |s^(m+1) d^(m+1)/ds^(m+1) T_s f|^2 ds/s)^(1/2).

    Integrated in u = log s over [log s_lo, log s_hi] with
    s_lo = 1e-6/||A||_inf and s_hi = 60(m+1)/alpha, alpha being the smallest
    real part among the nonzero eigenvalues of A.  ``info`` records the
    cutoffs, the quadrature error estimate and the integrand at both ends.
    """
    if m < 0:
        raise ValidationError("m must be >= 0")
    if not quad_tol > 0:
        raise ValidationError("quad_tol must be > 0")
    _check_space(f, g.space)
    a = g.matrix
    b = f.values
    for _ in range(m + 1):
        b = a @ b
    anorm = float(np.abs(a).sum(axis=1).max())
    if anorm == 0 or not np.any(b):
        return SquareFunctionResult(f.with_values(np.zeros_like(f.values)), 0.0, 0.0, True,
                                    {"cutoffs": None, "error": 0.0})
    eig = np.linalg.eigvals(a)
    nonzero = eig[np.abs(eig) > 1e-10 * anorm]
    if np.any(nonzero.real <= 0):
        raise ValidationError("generator has nonzero eigenvalues with Re <= 0; integral diverges")
    alpha = float(nonzero.real.min())
    s_lo = 1e-6 / anorm
    s_hi = 60.0 * (m + 1) / alpha

    def integrand(u):
        s = np.exp(u)
        v = g.semigroup(s, cache=False) @ b
        return s ** (2 * m + 2) * v ** 2

    lo, hi = np.log(s_lo), np.log(s_hi)
    total, err = quad_vec(integrand, lo, hi, epsabs=quad_tol, epsrel=1e-12, limit=2000)
    if err > quad_tol:
        raise ConvergenceError(f"square-function quadrature reached only {err:.3g}")
    ends = (float(np.max(integrand(lo))), float(np.max(integrand(hi))))
    # below s_lo: |s^(m+1) A^(m+1) T_s f| <= (s ||A||)^(m+1) e^(s||A||) ||f||
    low_tail = float(np.max(b ** 2)) * s_lo ** (2 * m + 2) * np.exp(2 * s_lo * anorm) / (2 * m + 2)
    return SquareFunctionResult(
        f.with_values(np.sqrt(np.maximum(total, 0.0))), ends[1] / max(float(np.max(total)), 1e-300),
        float(np.sqrt(low_tail)), False,
        {"cutoffs": (s_lo, s_hi), "error": float(err), "integrand_ends": ends},
    )


# --- mean ergodic projection ----------------------------------------------------

@dataclass(frozen=True)
class Projection:
    matrix: np.ndarray
    approximate: bool
    defect: float


def projection_matrix(op, *, tol: float = 1e-8, allow_fallback: bool = True) -> Projection:
    """Spectral projection onto the fixed space of T (or the null space of A).

    Built from an eigendecomposition; accepted only if P^2 = P, TP = P and
    PT = P (resp. AP = PA = 0) to within ``tol``.  Otherwise either raise
    NotDiagonalizableError or fall back to a long Cesaro average, flagged
    approximate.
    """
    is_gen = isinstance(op, Generator)
    mat = op.matrix if is_gen else _kernel_of(op)
    n = mat.shape[0]
    target = 0.0 if is_gen else 1.0
    lam, vec = np.linalg.eig(mat)
    sel = np.abs(lam - target) < 1e-8 * max(1.0, float(np.abs(mat).max()))
    defect = np.inf
    if np.linalg.cond(vec) < 1e8:
        inv = np.linalg.inv(vec)
        p = (vec[:, sel] @ inv[sel, :]).real
        if is_gen:
            checks = [p @ p - p, mat @ p, p @ mat]
        else:
            checks = [p @ p - p, mat @ p - p, p @ mat - p]
        defect = max(float(np.abs(c).max()) for c in checks) if n else 0.0
        if defect <= tol:
            return Projection(p, False, defect)
    if not allow_fallback:
        raise NotDiagonalizableError(
            f"eigendecomposition does not certify a projection (defect {defect:.3g})", defect
        )
    others = np.abs(lam[~sel] - target)
    gap = float(others.min()) if others.size else 1.0
    if not is_gen:
        gap = float(1 - np.abs(lam[~sel]).max()) if others.size else 1.0
    gap = max(gap, 1e-6)
    warnings.warn(
        f"projection not certified (defect {defect:.3g}); using a long Cesaro average",
        ApproximationWarning,
        stacklevel=2,
    )
    horizon = 1e6 / gap
    if is_gen:
        aug = np.zeros((2 * n, 2 * n))
        aug[:n, :n] = -mat * horizon
        aug[:n, n:] = np.eye(n) * horizon
        p = expm(aug)[:n, n:] / horizon
    else:
        steps = int(min(np.ceil(np.log2(horizon)), 40))
        s, power = np.eye(n), mat.copy()
        for _ in range(steps):
            s = s + power @ s
            power = power @ power
        p = s / 2.0 ** steps
    return Projection(p, True, defect)


def mean_projection(op, f: LatticeFunction, *, allow_fallback: bool = True) -> LatticeFunction:
    proj = projection_matrix(op, allow_fallback=allow_fallback)
    return f.with_values(proj.matrix @ f.values)


# --- algebraic identities -------------------------------------------------------

def identity_residuals(op, f: LatticeFunction, n: int, m: int, doubling_pair=None) -> dict:
    """Sup-norm residuals of two exact operator identities.

    decomposition: T^(2n+1) f = A_n f - ((n+1)/n) B_n f + ((2n+1)/n) M_2n f - ((n+1)/n) M_n f
        with A_n = (1/n) sum_{j=n}^{2n} (j+1) T^j (T - I), B_n = T^(2n+1) - T^n.
    doubling: Delta_n^(m+1)(S) f = sum_k C(m+1, k) Delta_(2n+k)^(m+1)(T) f for S = T^2,
        or for the pair (T_t, T_2t) passed as ``doubling_pair``.
    """
    if n < 1:
        raise ValidationError("identity residuals need n >= 1")
    k = _kernel_of(op)
    v = f.values
    powers = [v]
    for _ in range(2 * n + 1):
        powers.append(k @ powers[-1])
    diff = [powers[j + 1] - powers[j] for j in range(2 * n + 1)]
    a_n = sum((j + 1) * diff[j] for j in range(n, 2 * n + 1))
    b_n = powers[2 * n + 1] - powers[n]
    # n times the identity, with (2n+1) M_2n - (n+1) M_n = sum_{j=n+1}^{2n} T^j
    # paired against T^(2n+1) so that T = I cancels exactly
    tail = sum(powers[j] - powers[2 * n + 1] for j in range(n + 1, 2 * n + 1))
    gap = (a_n - (n + 1) * b_n + tail) / n
    decomposition = float(np.max(np.abs(gap)))

    if doubling_pair is None:
        t_single, t_double = k, k @ k
    else:
        t_single, t_double = (_kernel_of(x) for x in doubling_pair)
    lhs = delta_power(t_double, DeltaSpec(m + 1, n), f).values
    rhs = sum(comb(m + 1, j) * delta_power(t_single, DeltaSpec(m + 1, 2 * n + j), f).values
              for j in range(m + 2))
    doubling = float(np.max(np.abs(lhs - rhs)))
    return {"decomposition_residual": decomposition, "doubling_residual": doubling}


# --- built-in operators ---------------------------------------------------------

def _cyclic_shift(n):
    s = np.zeros((n, n))
    s[np.arange(n), (np.arange(n) + 1) % n] = 1.0
    return s


def shift(n: int) -> RegularOperator:
    """(Tf)(j) = f(j+1) on Z_n."""
    return build_regular_operator(_cyclic_shift(n), MeasureSpace.counting(n), f"shift({n})")


def identity(n: int) -> RegularOperator:
    return build_regular_operator(np.eye(n), MeasureSpace.counting(n), f"identity({n})")


def lazy_walk(n: int) -> RegularOperator:
    s = _cyclic_shift(n)
    k = 0.5 * np.eye(n) + 0.25 * (s + s.T)
    return build_regular_operator(k, MeasureSpace.counting(n), f"lazy_walk({n})")


def cycle_laplacian(n: int) -> Generator:
    s = _cyclic_shift(n)
    return Generator(MeasureSpace.counting(n), 2 * np.eye(n) - s - s.T, f"cycle_laplacian({n})")


def doubly_stochastic_random(n: int, seed: int, terms: int = 4) -> RegularOperator:
    """Random convex combination of permutation matrices."""
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(terms))
    k = np.zeros((n, n))
    for w in weights:
        k[np.arange(n), rng.permutation(n)] += w
    return build_regular_operator(k, MeasureSpace.counting(n), f"doubly_stochastic_random({n},{seed})")


def birth_death(n: int, p: float) -> RegularOperator:
    """Reflecting birth-death chain, certified on its stationary measure."""
    if not 0 < p < 1:
        raise ValidationError("birth_death needs 0 < p < 1")
    k = np.zeros((n, n))
    for i in range(n):
        k[i, min(i + 1, n - 1)] += p
        k[i, max(i - 1, 0)] += 1 - p
    ratio = p / (1 - p)
    pi = ratio ** np.arange(n, dtype=float)
    pi *= n / pi.sum()
    return build_regular_operator(k, MeasureSpace(pi), f"birth_death({n},{p!r})")


BUILTINS = {
    "shift": (shift, (int,)),
    "identity": (identity, (int,)),
    "lazy_walk": (lazy_walk, (int,)),
    "cycle_laplacian": (cycle_laplacian, (int,)),
    "doubly_stochastic_random": (doubly_stochastic_random, (int, int)),
    "birth_death": (birth_death, (int, float)),
}

_CALL = re.compile(r"^\s*([a-z_]+)\s*\(\s*([^)]*)\)\s*$")


def parse_operator(spec: str):
    """Build a named operator from text such as ``lazy_walk(64)``."""
    m = _CALL.match(spec)
    if not m or m.group(1) not in BUILTINS:
        raise ValidationError(
            f"unknown operator {spec!r}; built-ins: "
            + ", ".join(f"{k}({', '.join(t.__name__ for t in v[1])})" for k, v in BUILTINS.items())
        )
    func, types = BUILTINS[m.group(1)]
    raw = [a.strip() for a in m.group(2).split(",") if a.strip()]
    if len(raw) != len(types):
        raise ValidationError(f"{m.group(1)} expects {len(types)} argument(s), got {len(raw)}")
    try:
        args = [t(a) for t, a in zip(types, raw)]
    except ValueError as exc:
        raise ValidationError(f"bad argument in {spec!r}: {exc}") from None
    if args[0] < 1:
        raise ValidationError("operator size must be >= 1")
    return func(*args)
