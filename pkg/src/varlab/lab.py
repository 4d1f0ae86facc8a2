"""Experiment engine: empirical constants, jump profiles, convergence rates, probes.

Every experiment is a pure function of its config.  Ensemble members draw
from independent seeded streams and are reduced in index order, so results
do not depend on how many worker threads ran them.
"""

from __future__ import annotations

import os
import re
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import operators as ops
from .config import ExperimentConfig
from .ensembles import arm_of, draw_member, member_rng
from .errors import CertificateError, TailError, ValidationError, VarlabError
from .io import load_operator, load_weight
from .lattice import (
    LatticeFamily,
    LatticeFunction,
    MeasureSpace,
    lattice_maximal_norm,
    lattice_variation_norm,
    mixed_norm,
    pointwise_mixed_norm,
)
from .variation import jump_count, jump_count_batch, vq_norm, vq_norm_batch
from .weights import Weight, ap_characteristic, ap_characteristic_detail

SATURATION_LIMIT = 0.05
QUANTILES = (0.5, 0.9, 0.99)
# relative slack for comparisons that hold exactly in real arithmetic
ROUNDOFF = 1e-12


def worker_count() -> int:
    raw = os.environ.get("VARLAB_THREADS", "").strip()
    if not raw:
        return os.cpu_count() or 1
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"VARLAB_THREADS must be an integer, got {raw!r}") from None
    if n < 1:
        raise ValidationError("VARLAB_THREADS must be >= 1")
    return n


def ordered_map(fn, items):
    """map() over a thread pool; output order follows input order."""
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# --- results ----------------------------------------------------------------------

@dataclass
class ExperimentResult:
    """Scalars in ``summary``, equal-length columns grouped in ``series``."""

    kind: str
    summary: dict = field(default_factory=dict)
    series: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)
    info: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ConstantEstimate:
    sup_ratio: float
    argmax: dict
    quantiles: dict
    ensemble_size: int
    stability_trace: np.ndarray
    ratios: np.ndarray
    arms: tuple
    maximal_ratios: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    @property
    def last_quarter_increase(self) -> float:
        trace = self.stability_trace
        k = max(0, int(np.ceil(0.75 * trace.size)) - 1)
        if trace[k] == 0:
            return 0.0 if trace[-1] == 0 else np.inf
        return float(trace[-1] / trace[k] - 1.0)

    @property
    def saturated(self) -> bool:
        return self.last_quarter_increase < SATURATION_LIMIT

    @property
    def maximal_violations(self) -> int:
        if self.maximal_ratios is None:
            return 0
        return int(np.sum(self.maximal_ratios > self.ratios * (1 + ROUNDOFF)))

    def to_result(self, kind: str) -> ExperimentResult:
        res = ExperimentResult(kind)
        res.summary["sup_ratio"] = self.sup_ratio
        for q, v in self.quantiles.items():
            res.summary[f"quantile_{q:g}"] = v
        res.summary["ensemble_size"] = float(self.ensemble_size)
        res.summary["argmax_index"] = float(self.argmax["index"])
        res.summary["last_quarter_increase"] = self.last_quarter_increase
        res.series["member"] = {"ratio": self.ratios, "stability_trace": self.stability_trace}
        if self.maximal_ratios is not None:
            res.series["member"]["maximal_ratio"] = self.maximal_ratios
            res.summary["maximal_sup_ratio"] = float(self.maximal_ratios.max())
            res.summary["maximal_violations"] = float(self.maximal_violations)
        res.summary.update({k: float(v) for k, v in self.extras.items()})
        res.info["argmax"] = dict(self.argmax)
        res.info["arms"] = sorted(set(self.arms))
        if not self.saturated:
            res.flags.append("UNSATURATED")
        return res


def summarize(ratios, seed: int, arms, maximal=None, extras=None) -> ConstantEstimate:
    ratios = np.asarray(ratios, dtype=float)
    i = int(np.argmax(ratios))
    quant = {q: float(np.quantile(ratios, q)) for q in QUANTILES}
    return ConstantEstimate(
        sup_ratio=float(ratios[i]),
        argmax={"seed": int(seed), "index": i, "arm": arms[i]},
        quantiles=quant,
        ensemble_size=ratios.size,
        stability_trace=np.maximum.accumulate(ratios),
        ratios=ratios,
        arms=tuple(arms),
        maximal_ratios=None if maximal is None else np.asarray(maximal, dtype=float),
        extras=extras or {},
    )


# --- building blocks from the config ----------------------------------------------------

_WEIGHT = re.compile(r"^\s*([a-z_]+)\s*\(([^)]*)\)\s*$")


def build_operator(cfg: ExperimentConfig):
    spec = cfg.operator.strip()
    if spec.startswith("fixture:"):
        return load_operator(cfg.resolve(spec[len("fixture:"):].strip()))
    return ops.parse_operator(spec)


def build_weight(spec: str, cfg: ExperimentConfig | None = None) -> Weight:
    """``constant(N)``, ``step(N)``, ``power(N, alpha)`` or ``fixture:path``.

    Built-in weights live on -N/2, ..., N - N/2 - 1.  ``step`` is 1 on the
    negative half and 2 on the rest; ``power`` is max(|n|, 1)^alpha.
    """
    spec = spec.strip()
    if spec.startswith("fixture:"):
        path = spec[len("fixture:"):].strip()
        return load_weight(cfg.resolve(path) if cfg else path)
    m = _WEIGHT.match(spec)
    args = [a.strip() for a in m.group(2).split(",")] if m else []
    try:
        if m and m.group(1) == "constant" and len(args) == 1:
            n = int(args[0])
            vals = lambda k: np.ones(k.size)  # noqa: E731
        elif m and m.group(1) == "step" and len(args) == 1:
            n = int(args[0])
            vals = lambda k: np.where(k >= 0, 2.0, 1.0)  # noqa: E731
        elif m and m.group(1) == "power" and len(args) == 2:
            n, alpha = int(args[0]), float(args[1])
            vals = lambda k: np.maximum(np.abs(k), 1.0) ** alpha  # noqa: E731
        else:
            raise ValidationError(
                f"unknown weight {spec!r}; use constant(N), step(N), power(N, alpha) or fixture:path"
            )
    except ValueError:
        raise ValidationError(f"bad weight arguments in {spec!r}") from None
    if n < 2:
        raise ValidationError("weight length must be >= 2")
    lo = -(n // 2)
    return Weight.from_function(vals, lo, lo + n - 1)


def sigma_space(cfg: ExperimentConfig) -> MeasureSpace:
    return MeasureSpace.counting(cfg.ensemble.sigma_dim)


def time_grid(cfg: ExperimentConfig, refined: bool = False) -> np.ndarray:
    g = cfg.grid
    coarse = np.geomspace(g.t_min, g.t_max, g.t_points)
    if not refined:
        return coarse
    mids = np.sqrt(coarse[1:] * coarse[:-1])
    out = np.empty(2 * coarse.size - 1)
    out[0::2], out[1::2] = coarse, mids
    return out


def member_function(cfg: ExperimentConfig, omega: MeasureSpace, index: int,
                    sigma: MeasureSpace | None = None) -> LatticeFunction:
    sigma = sigma or sigma_space(cfg)
    e = cfg.ensemble
    vals = draw_member(e.generator, e.seed, index, (omega.size, sigma.size))
    return LatticeFunction(omega, sigma, vals)


def require_regular(op, what: str):
    if not isinstance(op, ops.RegularOperator):
        raise ValidationError(f"{what} needs a kernel operator, got a generator")
    c = op.certificates
    failed = [n for n, ok in (("L1 contraction", c.l1_contractive),
                              ("L-infinity contraction", c.linf_contractive)) if not ok]
    if failed:
        raise CertificateError(f"{op.name}: contractive regularity failed ({', '.join(failed)})")


def require_analytic(op: ops.RegularOperator, p: float, N: int):
    flat, half, full = ops.analyticity_trend_flat(op, p, N)
    if not flat:
        raise CertificateError(
            f"{op.name}: analyticity trend not flat: max n||T^n - T^(n-1)|| is {full:.4g} "
            f"up to n = {N} against {half:.4g} up to n = {N // 2}"
        )


def require_generator(g, cfg: ExperimentConfig, times):
    if not isinstance(g, ops.Generator):
        raise ValidationError(f"{cfg.kind} needs a generator, got a kernel operator")
    for t in times:
        require_regular(g.as_operator(float(t)), cfg.kind)
    require_analytic(g.as_operator(1.0), cfg.p, cfg.tolerances.analyticity_n)


def family_builder(cfg: ExperimentConfig, op):
    """Return (omega, f -> LatticeFamily) for the family the kind measures."""
    kind = cfg.kind
    n_max = cfg.grid.n_max
    if kind in ("variational_Z", "weighted_variational"):
        return op.space, lambda f: ops.averages_Z_family(f, n_max)
    if kind == "variational_semigroup_discrete":
        require_regular(op, kind)
        require_analytic(op, cfg.p, cfg.tolerances.analyticity_n)
        return op.space, lambda f: ops.delta_family(op, f, cfg.m, n_max, n_min=1)
    if kind == "variational_semigroup_continuous" or isinstance(op, ops.Generator):
        grid = time_grid(cfg, refined=cfg.grid.refine)
        require_generator(op, cfg, grid)
        return op.space, lambda f: ops.semigroup_family(op, f, grid)
    require_regular(op, kind)
    return op.space, lambda f: ops.ergodic_family(op, f, n_max)


# --- constant estimation ----------------------------------------------------------

def _member_ratios(cfg, omega, build, sigma=None, q=None, r=None, with_maximal=True):
    q = cfg.q if q is None else q
    r = cfg.r if r is None else r

    def one(i):
        f = member_function(cfg, omega, i, sigma)
        fam = build(f)
        nf = mixed_norm(f, cfg.p, r)
        var = lattice_variation_norm(fam, cfg.p, q, r) / nf
        mx = lattice_maximal_norm(fam, cfg.p, r) / nf if with_maximal else np.nan
        extra = np.nan
        if cfg.kind == "variational_semigroup_continuous" and cfg.grid.refine:
            coarse = LatticeFamily(fam.grid[0::2], fam.omega, fam.sigma, fam.values[0::2])
            extra = lattice_variation_norm(coarse, cfg.p, q, r) / nf
        return var, mx, extra

    out = ordered_map(one, range(cfg.ensemble.count))
    arr = np.array(out, dtype=float).reshape(-1, 3)
    arms = [arm_of(cfg.ensemble.generator, i) for i in range(cfg.ensemble.count)]
    return arr[:, 0], arr[:, 1], arr[:, 2], arms


def estimate_variational_constant(cfg: ExperimentConfig, op=None, q=None) -> ConstantEstimate:
    """Ensemble sup of ||v_q(family of f)|| / ||f|| in L^p(Omega; L^r(Sigma))."""
    op = build_operator(cfg) if op is None else op
    omega, build = family_builder(cfg, op)
    var, mx, coarse, arms = _member_ratios(cfg, omega, build, q=q)
    extras = {}
    if cfg.kind == "variational_semigroup_continuous" and cfg.grid.refine:
        # one bisection of the log grid; the reported value uses the refined grid
        change = float(np.max((var - coarse) / np.where(coarse > 0, coarse, 1.0)))
        extras["refinement_change"] = change
        extras["refinement_stable"] = float(change <= cfg.tolerances.refine_rel_tol)
    return summarize(var, cfg.ensemble.seed, arms, maximal=mx, extras=extras)


def estimate_m_order_constant(cfg: ExperimentConfig, op=None) -> ConstantEstimate:
    """Constant for the family (n^m Delta_n^m f)_{n >= 1} of an analytic operator."""
    if cfg.kind != "variational_semigroup_discrete":
        cfg = cfg.replace(kind="variational_semigroup_discrete")
    return estimate_variational_constant(cfg, op)


def estimate_maximal_constant(cfg: ExperimentConfig, op=None, r=None) -> ConstantEstimate:
    op = build_operator(cfg) if op is None else op
    omega, build = family_builder(cfg, op)

    def one(i):
        f = member_function(cfg, omega, i)
        rr = cfg.r if r is None else r
        return lattice_maximal_norm(build(f), cfg.p, rr) / mixed_norm(f, cfg.p, rr)

    ratios = ordered_map(one, range(cfg.ensemble.count))
    arms = [arm_of(cfg.ensemble.generator, i) for i in range(cfg.ensemble.count)]
    return summarize(ratios, cfg.ensemble.seed, arms)


def estimate_square_function_constant(cfg: ExperimentConfig, op=None) -> ConstantEstimate:
    """Ensemble sup of ||S_m f|| / ||f||, aborting when a tail diagnostic fails."""
    op = build_operator(cfg) if op is None else op
    limit = cfg.tolerances.tail_ratio
    if isinstance(op, ops.Generator):
        require_generator(op, cfg, [1.0])
    else:
        require_regular(op, cfg.kind)
        require_analytic(op, cfg.p, cfg.tolerances.analyticity_n)

    def one(i):
        f = member_function(cfg, op.space, i)
        if isinstance(op, ops.Generator):
            res = ops.square_function_continuous(op, f, cfg.m, quad_tol=cfg.tolerances.quad_tol)
        else:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                res = ops.square_function_discrete(op, f, cfg.m, cfg.tolerances.square_n_max)
        if res.tail_ratio > limit:
            raise TailError(
                f"member {i}: square function tail ratio {res.tail_ratio:.3g} exceeds {limit:g}; "
                f"raise square_n_max"
            )
        return mixed_norm(res.values, cfg.p, cfg.r) / mixed_norm(f, cfg.p, cfg.r), res.tail_ratio

    out = np.array(ordered_map(one, range(cfg.ensemble.count)))
    arms = [arm_of(cfg.ensemble.generator, i) for i in range(cfg.ensemble.count)]
    return summarize(out[:, 0], cfg.ensemble.seed, arms, extras={"max_tail_ratio": float(out[:, 1].max())})


def q_sweep(cfg: ExperimentConfig, qs=(2.05, 2.1, 2.25, 2.5, 3.0)) -> ExperimentResult:
    """sup_ratio on one ensemble for several q; expected nonincreasing in q."""
    qs = tuple(sorted(qs))
    op = build_operator(cfg)
    sups = np.array([estimate_variational_constant(cfg, op, q=q).sup_ratio for q in qs])
    res = ExperimentResult("q_sweep")
    res.series["q"] = {"q": np.array(qs), "sup_ratio": sups}
    monotone = bool(np.all(np.diff(sups) <= ROUNDOFF * sups[:-1]))
    res.summary["nonincreasing_in_q"] = float(monotone)
    if not monotone:
        res.flags.append("NONMONOTONE_IN_Q")
    return res


# --- jumps ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JumpReportRow:
    lam: float
    K: int
    tail_mass: float
    bound: float
    scaled_bound: float
    total_mass: float


def jump_profile(cfg: ExperimentConfig, lambdas=None, Ks=None, op=None, f=None,
                 constant=None, sample_points: int = 100):
    """Tail masses of the jump count against the Chebyshev bound.

    The bound ||f||^p / (lam^p K^(p/q)) is scaled by constant^p, where the
    constant defaults to the ratio of f itself, the smallest value that makes
    the bound a theorem for this f.  The pointwise inequality
    lam^q N <= v_q^q is re-verified at ``sample_points`` random points.
    """
    lambdas = tuple(cfg.grid.lambdas if lambdas is None else lambdas)
    Ks = tuple(cfg.grid.ks if Ks is None else Ks)
    if any(not lam > 0 for lam in lambdas) or any(not k > 0 for k in Ks):
        raise ValidationError("jump profile needs lambda > 0 and K > 0")
    op = build_operator(cfg) if op is None else op
    omega, build = family_builder(cfg, op)
    f = member_function(cfg, omega, 0) if f is None else f
    fam = build(f)
    p, q, r = cfg.p, cfg.q, cfg.r
    nf = mixed_norm(f, p, r)
    vq = vq_norm_batch(fam.values, q)
    if constant is None:
        constant = pointwise_mixed_norm(vq, f.omega, f.sigma, p, r) / nf
    cell = np.outer(f.omega.weights, f.sigma.weights)
    total = float(cell.sum())

    rows = []
    for lam in lambdas:
        counts = jump_count_batch(fam.values, lam)
        for K in Ks:
            tail = float(cell[counts > K].sum())
            bound = nf ** p / (lam ** p * K ** (p / q))
            scaled = constant ** p * bound
            if p == r and tail > scaled * (1 + ROUNDOFF):
                raise VarlabError(
                    f"jump tail {tail:.6g} exceeds the bound {scaled:.6g} at lambda={lam}, K={K}; "
                    "the constant estimate is not a true sup"
                )
            rows.append(JumpReportRow(float(lam), int(K), tail, bound, scaled, total))

    # pointwise re-verification on random lattice points
    rng = member_rng(cfg.ensemble.seed, 2 ** 32 - 1)
    flat = fam.values.reshape(fam.values.shape[0], -1)
    picks = rng.integers(0, flat.shape[1], size=sample_points)
    lam_picks = rng.choice(np.array(lambdas), size=sample_points)
    violations = 0
    for col, lam in zip(picks, lam_picks):
        seq = flat[:, col]
        n = jump_count(seq, lam).count
        if lam ** q * n > vq_norm(seq, q).power * (1 + ROUNDOFF):
            violations += 1
    if violations:
        raise VarlabError(f"pointwise jump inequality failed at {violations} sample points")
    return rows, {"constant": constant, "pointwise_checks": sample_points, "pointwise_violations": 0}


def jump_result(cfg: ExperimentConfig) -> ExperimentResult:
    rows, info = jump_profile(cfg)
    res = ExperimentResult(cfg.kind)
    res.series["jump"] = {
        "lambda": np.array([x.lam for x in rows]),
        "K": np.array([float(x.K) for x in rows]),
        "tail_mass": np.array([x.tail_mass for x in rows]),
        "bound": np.array([x.bound for x in rows]),
        "scaled_bound": np.array([x.scaled_bound for x in rows]),
    }
    res.summary["constant"] = info["constant"]
    res.summary["total_mass"] = rows[0].total_mass
    res.summary["pointwise_checks"] = float(info["pointwise_checks"])
    res.summary["pointwise_violations"] = float(info["pointwise_violations"])
    res.info["chebyshev_asserted"] = cfg.p == cfg.r
    return res


# --- convergence -----------------------------------------------------------------

def _fit_loglog(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(y <= 0):
        return float("nan")
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _fit_exponent(x, y):
    """Decay rate c in y ~ C exp(-c x)."""
    x, y = np.asarray(x, float), np.asarray(y, float)
    if np.any(y <= 0):
        return float("nan")
    return float(-np.polyfit(x, np.log(y), 1)[0])


def _nonincreasing(y):
    y = np.asarray(y)
    return bool(np.all(np.diff(y) <= ROUNDOFF * np.abs(y[:-1]) + 1e-300))


def convergence_profile(cfg: ExperimentConfig, op=None, f=None) -> ExperimentResult:
    """Sup-norm errors of averages and semigroup values against their limits.

    For a kernel T: |M_n f - P f| over ``average_grid`` (log-log slope) and
    |T^n f - P f| over ``decay_grid`` (exponential rate, compared with
    -log of the second largest eigenvalue modulus).  For a generator A the
    same with M_t and T_t, the rate compared with the spectral gap, plus
    |T_t f - f| over ``small_t_grid`` as t -> 0+.
    """
    op = build_operator(cfg) if op is None else op
    f = member_function(cfg, op.space, 0) if f is None else f
    g = cfg.grid
    res = ExperimentResult(cfg.kind)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        proj = ops.projection_matrix(op)
    if proj.approximate:
        res.flags.append("APPROXIMATE_PROJECTION")
        res.info["projection_warning"] = str(caught[-1].message) if caught else ""
    pf = proj.matrix @ f.values

    def sup(v):
        return float(np.max(np.abs(v)))

    is_gen = isinstance(op, ops.Generator)
    if is_gen:
        avg_x = np.asarray(g.average_grid, float)
        avg_err = [sup(ops.ergodic_average_continuous(op, t, f).values - pf) for t in avg_x]
        dec_x = np.asarray(g.decay_grid, float)
        dec_err = [sup(op.semigroup(t) @ f.values - pf) for t in dec_x]
        small_x = np.asarray(g.small_t_grid, float)
        small_err = [sup(op.semigroup(t) @ f.values - f.values) for t in small_x]
        lam = np.linalg.eigvals(op.matrix)
        rest = lam.real[np.abs(lam) > 1e-8 * max(1.0, np.abs(op.matrix).max())]
        expected = float(rest.min()) if rest.size else float("nan")
        res.series["small_t"] = {"t": small_x, "error": np.array(small_err)}
        res.summary["small_t_slope"] = _fit_loglog(small_x, small_err)
    else:
        avg_x = np.asarray(g.average_grid, float)
        dec_x = np.asarray(g.decay_grid, float)
        if np.any(avg_x != np.round(avg_x)) or np.any(dec_x != np.round(dec_x)):
            raise ValidationError("[grid] discrete convergence grids must be integers")
        n_top = int(max(avg_x.max(), dec_x.max()))
        want_avg, want_dec = set(avg_x.astype(int)), set(dec_x.astype(int))
        avg_err, dec_err = {}, {}
        power, avg = f.values, f.values
        for n in range(1, n_top + 1):
            power = op.kernel @ power
            avg = (n * avg + power) / (n + 1)
            if n in want_avg:
                avg_err[n] = sup(avg - pf)
            if n in want_dec:
                dec_err[n] = sup(power - pf)
        avg_err = [avg_err[int(n)] for n in avg_x]
        dec_err = [dec_err[int(n)] for n in dec_x]
        lam = np.abs(np.linalg.eigvals(op.kernel))
        rest = lam[np.abs(lam - 1) > 1e-8]
        expected = float(-np.log(rest.max())) if rest.size and rest.max() > 0 else float("inf")

    res.series["average"] = {"x": avg_x, "error": np.array(avg_err)}
    res.series["decay"] = {"x": dec_x, "error": np.array(dec_err)}
    res.summary["average_slope"] = _fit_loglog(avg_x, avg_err)
    measured = _fit_exponent(dec_x, dec_err)
    res.summary["decay_exponent"] = measured
    res.summary["expected_exponent"] = expected
    res.summary["exponent_ratio"] = measured / expected if expected else float("nan")
    res.summary["average_nonincreasing"] = float(_nonincreasing(avg_err))
    res.summary["decay_nonincreasing"] = float(_nonincreasing(dec_err))
    for name in ("average", "decay"):
        if not res.summary[f"{name}_nonincreasing"]:
            res.flags.append(f"NONMONOTONE_{name.upper()}")
    return res


# --- l^1 probe ---------------------------------------------------------------------

def ell1_probe(cfg: ExperimentConfig, op=None) -> ExperimentResult:
    """Maximal-norm ratios at r = 1 and r = 2 as the Sigma dimension grows.

    Only the trend is reported; growth of the r = 1 arm is expected, no bound
    is asserted either way.
    """
    op = build_operator(cfg) if op is None else op
    omega, build = family_builder(cfg, op)
    dims = tuple(cfg.grid.sigma_dims)
    arms = {1.0: [], 2.0: []}
    for d in dims:
        sigma = MeasureSpace.counting(d)

        def one(i, sigma=sigma):
            f = member_function(cfg, omega, i, sigma)
            fam = build(f)
            return tuple(lattice_maximal_norm(fam, cfg.p, r) / mixed_norm(f, cfg.p, r) for r in (1.0, 2.0))

        out = np.array(ordered_map(one, range(cfg.ensemble.count)))
        arms[1.0].append(out[:, 0].max())
        arms[2.0].append(out[:, 1].max())
    res = ExperimentResult(cfg.kind)
    r1, r2 = np.array(arms[1.0]), np.array(arms[2.0])
    res.series["ell1"] = {"sigma_dim": np.array(dims, float), "r1_sup_ratio": r1, "r2_sup_ratio": r2}
    res.summary["r1_nondecreasing"] = float(np.all(np.diff(r1) >= -ROUNDOFF * r1[:-1]))
    res.summary["r1_growth"] = float(r1[-1] / r1[0])
    res.summary["r2_growth"] = float(r2[-1] / r2[0])
    res.info["note"] = "trend only; no inequality is asserted"
    return res


# --- weighted probe ----------------------------------------------------------------

def _weighted_space(cfg: ExperimentConfig, w: Weight):
    op = build_operator(cfg)
    if not isinstance(op, ops.RegularOperator) or op.name != f"shift({w.values.size})":
        raise ValidationError(
            f"[operator] spec: weighted probe runs on Z_N with shift(N), N = weight length {w.values.size}"
        )
    return MeasureSpace(np.array(w.values)), op


def weighted_variational_probe(cfg: ExperimentConfig, w: Weight | None = None):
    """Scalar ratio ||v_q(A_n f)||_{L^p(w)} / ||f||_{L^p(w)} on Z_N, with [w]_{A_p}."""
    if cfg.ensemble.sigma_dim != 1:
        raise ValidationError("[ensemble] sigma_dim: the weighted probe is scalar-valued (sigma_dim = 1)")
    w = build_weight(cfg.weight, cfg) if w is None else w
    omega, _ = _weighted_space(cfg, w)
    build = lambda f: ops.averages_Z_family(f, cfg.grid.n_max)  # noqa: E731
    var, mx, _, arms = _member_ratios(cfg, omega, build)
    detail = ap_characteristic_detail(w, cfg.p, max_len=min(w.values.size, 512))
    est = summarize(var, cfg.ensemble.seed, arms, maximal=mx,
                    extras={"ap_characteristic": detail.value, "ap_max_len": float(detail.max_len)})
    return est, detail


def weighted_sweep(cfg: ExperimentConfig, alphas) -> ExperimentResult:
    """Power weights max(|n|,1)^alpha: sup_ratio against [w]_{A_p}, trend only."""
    n = int(re.search(r"\d+", cfg.operator).group())
    chars, sups = [], []
    for a in alphas:
        est, det = weighted_variational_probe(cfg, build_weight(f"power({n}, {a!r})"))
        chars.append(det.value)
        sups.append(est.sup_ratio)
    res = ExperimentResult("weighted_sweep")
    order = np.argsort(chars, kind="stable")
    res.series["sweep"] = {"alpha": np.asarray(alphas, float)[order],
                           "ap_characteristic": np.array(chars)[order],
                           "sup_ratio": np.array(sups)[order]}
    s = np.array(sups)[order]
    res.summary["sup_nondecreasing_in_characteristic"] = float(np.all(np.diff(s) >= -ROUNDOFF * s[:-1]))
    return res


# --- dispatch ----------------------------------------------------------------------

def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    kind = cfg.kind
    if kind.startswith("variational_"):
        res = estimate_variational_constant(cfg).to_result(kind)
    elif kind == "maximal":
        res = estimate_maximal_constant(cfg).to_result(kind)
    elif kind == "square_function":
        res = estimate_square_function_constant(cfg).to_result(kind)
    elif kind == "jump_profile":
        res = jump_result(cfg)
    elif kind == "convergence":
        res = convergence_profile(cfg)
    elif kind == "ell1_probe":
        res = ell1_probe(cfg)
    elif kind == "weighted_variational":
        est, _ = weighted_variational_probe(cfg)
        res = est.to_result(kind)
    else:  # pragma: no cover - validate() rejects unknown kinds
        raise ValidationError(f"unknown kind {kind}")
    if cfg.allow_small_q and not cfg.q > 2:
        res.flags.append("Q_OVERRIDE")
    return res


__all__ = [
    "ConstantEstimate", "ExperimentResult", "JumpReportRow", "ap_characteristic",
    "build_operator", "build_weight", "convergence_profile", "ell1_probe",
    "estimate_m_order_constant", "estimate_maximal_constant", "estimate_square_function_constant",
    "estimate_variational_constant", "jump_profile", "q_sweep", "run_experiment",
    "weighted_sweep", "weighted_variational_probe", "worker_count",
]
