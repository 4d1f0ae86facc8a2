"""Matrix exponential and L^p operator norms on atomic measure spaces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, ValidationError

# Higham (2005) Pade degrees and the 1-norm thresholds below which they suffice.
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0, 13: 5.371920351148152e0}
_PADE = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0, 960960.0,
         16380.0, 182.0, 1.0),
}


def _pade_uv(a, m):
    b = _PADE[m]
    n = a.shape[0]
    ident = np.eye(n)
    a2 = a @ a
    if m < 13:
        powers = [ident, a2]
        while len(powers) < (m + 1) // 2:
            powers.append(powers[-1] @ a2)
        u = a @ sum(b[2 * k + 1] * powers[k] for k in range(len(powers)))
        v = sum(b[2 * k] * powers[k] for k in range(len(powers)))
        return u, v
    a4 = a2 @ a2
    a6 = a4 @ a2
    u = a @ (a6 @ (b[13] * a6 + b[11] * a4 + b[9] * a2)
             + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * ident)
    v = (a6 @ (b[12] * a6 + b[10] * a4 + b[8] * a2)
         + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * ident)
    return u, v


def expm(a) -> np.ndarray:
    """exp(a) by scaling and squaring around a diagonal Pade approximant."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("expm needs a square matrix")
    if not np.all(np.isfinite(a)):
        raise ValidationError("expm input has non-finite entries")
    norm1 = np.abs(a).sum(axis=0).max() if a.size else 0.0
    squarings = 0
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            break
    else:
        m = 13
        if norm1 > _THETA[13]:
            squarings = int(np.ceil(np.log2(norm1 / _THETA[13])))
        a = a / 2.0 ** squarings
    u, v = _pade_uv(a, m)
    r = np.linalg.solve(v - u, v + u)
    for _ in range(squarings):
        r = r @ r
    if not np.all(np.isfinite(r)):
        raise OverflowError(f"matrix exponential overflowed (1-norm {norm1:.3g})")
    return r


@dataclass(frozen=True)
class NormEstimate:
    value: float
    exact: bool
    iterations: int = 0


def _boyd_power(b, p, tol, maxiter):
    """l^p -> l^p norm of an entrywise nonnegative matrix (Boyd's iteration)."""
    pd = p / (p - 1.0)
    n = b.shape[1]
    x = np.full(n, n ** (-1.0 / p))
    est = 0.0
    for it in range(1, maxiter + 1):
        y = b @ x
        ny = np.sum(y ** p) ** (1.0 / p)
        if ny == 0:
            return 0.0, it
        z = b.T @ (y / ny) ** (p - 1.0)
        nz = np.sum(z ** pd) ** (1.0 / pd)
        x = (z / nz) ** (pd - 1.0)
        x /= np.sum(x ** p) ** (1.0 / p)
        if abs(ny - est) <= tol * ny:
            return max(ny, float(np.sum((b @ x) ** p) ** (1.0 / p))), it
        est = ny
    raise ConvergenceError(f"power iteration did not converge in {maxiter} iterations")


def operator_norm(kernel, weights, p: float, *, tol: float = 1e-8,
                  maxiter: int = 10_000) -> NormEstimate:
    """Norm of f -> K f on L^p(mu), mu given by atom weights.

    Exact for p in {1, 2, inf} and for entrywise nonnegative kernels.  For
    signed kernels at other p the result is an upper bound: the smaller of the
    |K| power-iteration value and the Riesz-Thorin interpolation bound.
    """
    k = np.asarray(kernel, dtype=float)
    w = np.asarray(weights, dtype=float)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] != w.size:
        raise ValidationError("kernel must be square and match the measure")
    if p == np.inf:
        return NormEstimate(float(np.abs(k).sum(axis=1).max()), True)
    if p == 1:
        return NormEstimate(float(((w @ np.abs(k)) / w).max()), True)
    if not p > 1:
        raise ValidationError(f"operator norms need p >= 1, got {p}")
    b = (w[:, None] ** (1.0 / p)) * k * (w[None, :] ** (-1.0 / p))
    if p == 2:
        return NormEstimate(float(np.linalg.norm(b, 2)), True)
    if np.all(k >= 0):
        val, it = _boyd_power(b, p, tol, maxiter)
        return NormEstimate(val, True, it)
    val, it = _boyd_power(np.abs(b), p, tol, maxiter)
    one = operator_norm(k, w, 1).value
    inf = operator_norm(k, w, np.inf).value
    rt = one ** (1.0 / p) * inf ** (1.0 - 1.0 / p)
    return NormEstimate(min(val, rt), False, it)
