import json
from pathlib import Path

import numpy as np
import pytest

from varlab import lab
from varlab import operators as ops
from varlab.config import EnsembleConfig, ExperimentConfig, GridConfig, ToleranceConfig, load_config
from varlab.errors import CertificateError, TailError, ValidationError
from varlab.lattice import LatticeFunction, MeasureSpace, lattice_variation_norm, mixed_norm
from varlab.variation import jump_count, vq_norm, vq_norm_oracle

CONFIGS = Path(__file__).resolve().parents[1] / "configs"
BASELINES = Path(__file__).resolve().parent / "baselines"


def cfg_for(kind, operator, count=8, generator="all", seed=1, sigma_dim=2, **kw):
    grid = kw.pop("grid", GridConfig(n_max=8, t_points=12))
    return ExperimentConfig(kind=kind, operator=operator, ensemble=EnsembleConfig(count, generator, seed, sigma_dim),
                            grid=grid, **kw)


def zero_generator(n):
    return ops.Generator(MeasureSpace.counting(n), np.zeros((n, n)), "zero")


def pin(name, est):
    path = BASELINES / f"{name}.json"
    current = {"sup_ratio": est.sup_ratio, "ratios": est.ratios.tolist()}
    if not path.exists():
        path.write_text(json.dumps(current, indent=1) + "\n")
        return
    pinned = json.loads(path.read_text())
    np.testing.assert_allclose(est.ratios, pinned["ratios"], rtol=1e-9, atol=0)


# --- constants ------------------------------------------------------------------

def test_identity_semigroup_ratio_exactly_one():
    cfg = cfg_for("variational_semigroup_continuous", "cycle_laplacian(6)")
    est = lab.estimate_variational_constant(cfg, op=zero_generator(6))
    assert np.all(est.ratios == 1.0)
    assert est.sup_ratio == 1.0


def test_shift_averages_delta_hand_composition():
    cfg = cfg_for("variational_Z", "shift(64)", count=1, generator="delta", sigma_dim=1,
                  grid=GridConfig(n_max=16))
    est = lab.estimate_variational_constant(cfg)
    # A_n e_0(j) = 1/(n+1) when -n <= j <= 0 (cyclically), else 0
    n = np.arange(17)
    pointwise = []
    for j in range(64):
        back = (64 - j) % 64
        seq = np.where(back <= n, 1.0 / (n + 1), 0.0)
        pointwise.append(vq_norm_oracle(seq, 3.0).norm)
    want = np.sqrt(np.sum(np.square(pointwise)))
    assert est.sup_ratio == pytest.approx(want, rel=1e-12)


def test_lazy_walk_powers_stable_and_pinned():
    cfg = load_config(CONFIGS / "lazy_walk64_powers.ini")
    assert (cfg.ensemble.count, cfg.ensemble.generator, cfg.ensemble.seed) == (200, "gaussian", 7)
    est = lab.estimate_variational_constant(cfg)
    assert np.isfinite(est.sup_ratio)
    assert est.last_quarter_increase < 0.05
    pin("lazy_walk64_powers", est)


def test_constant_estimate_invariants():
    est = lab.estimate_variational_constant(cfg_for("variational_ergodic", "lazy_walk(16)", count=40))
    assert all(est.sup_ratio >= v for v in est.quantiles.values())
    assert np.all(np.diff(est.stability_trace) >= 0)
    assert est.stability_trace[-1] == est.sup_ratio
    assert est.argmax["arm"] == est.arms[est.argmax["index"]]
    assert est.maximal_violations == 0


def test_m_order_identity_is_zero_and_m0_matches_powers():
    cfg = cfg_for("variational_semigroup_discrete", "identity(6)", m=2)
    assert lab.estimate_m_order_constant(cfg).sup_ratio == 0.0
    cfg0 = cfg_for("variational_semigroup_discrete", "lazy_walk(12)", m=0, count=5)
    est = lab.estimate_m_order_constant(cfg0)
    op = ops.lazy_walk(12)
    for i in range(5):
        f = lab.member_function(cfg0, op.space, i)
        fam = ops.powers_family(op, f, cfg0.grid.n_max)
        want = lattice_variation_norm(fam, 2, 3, 2) / mixed_norm(f, 2, 2)
        assert est.ratios[i] == want


def test_m_order_lazy_walk_stable():
    est = lab.estimate_m_order_constant(load_config(CONFIGS / "lazy_walk32_m1.ini"))
    assert np.isfinite(est.sup_ratio) and est.saturated
    pin("lazy_walk32_m1", est)


def test_constant_monotone_in_q():
    cfg = cfg_for("variational_ergodic", "lazy_walk(16)", count=20)
    res = lab.q_sweep(cfg)
    sups = res.series["q"]["sup_ratio"]
    assert res.summary["nonincreasing_in_q"] == 1.0
    assert np.all(np.diff(sups) <= 1e-12 * sups[:-1])


def test_determinism_across_threads(monkeypatch):
    cfg = cfg_for("variational_semigroup_continuous", "cycle_laplacian(8)", count=12)
    monkeypatch.setenv("VARLAB_THREADS", "1")
    a = lab.estimate_variational_constant(cfg)
    monkeypatch.setenv("VARLAB_THREADS", "3")
    b = lab.estimate_variational_constant(cfg)
    assert a.ratios.tobytes() == b.ratios.tobytes()


def test_bad_thread_env(monkeypatch):
    monkeypatch.setenv("VARLAB_THREADS", "zero")
    with pytest.raises(ValidationError):
        lab.worker_count()


def test_certificate_failures():
    with pytest.raises(CertificateError, match="analyticity"):
        lab.estimate_variational_constant(cfg_for("variational_semigroup_discrete", "shift(8)"))
    two = ops.build_regular_operator(2 * np.eye(4), MeasureSpace.counting(4), "double")
    with pytest.raises(CertificateError, match="L1 contraction"):
        lab.estimate_variational_constant(cfg_for("variational_ergodic", "identity(4)"), op=two)


def test_square_function_tail_failure_aborts():
    cfg = cfg_for("square_function", "lazy_walk(16)", tolerances=ToleranceConfig(square_n_max=20))
    with pytest.raises(TailError):
        lab.estimate_square_function_constant(cfg)


def test_square_function_generator():
    cfg = cfg_for("square_function", "cycle_laplacian(6)", count=3)
    est = lab.estimate_square_function_constant(cfg)
    assert 0 < est.sup_ratio < np.inf


# --- jumps ----------------------------------------------------------------------

def test_jump_profile_constant_family():
    rows, _ = lab.jump_profile(cfg_for("jump_profile", "identity(5)"), lambdas=(0.01, 0.1), Ks=(1, 2))
    assert all(r.tail_mass == 0 for r in rows)


def test_jump_profile_lambda_above_oscillation():
    cfg = cfg_for("jump_profile", "lazy_walk(8)", generator="gaussian")
    rows, _ = lab.jump_profile(cfg, lambdas=(100.0,), Ks=(1,))
    assert rows[0].tail_mass == 0.0


def test_jump_profile_heat_matches_pointwise_oracle():
    cfg = load_config(CONFIGS / "jump_heat32.ini")
    rows, info = lab.jump_profile(cfg)
    g = ops.cycle_laplacian(32)
    f = LatticeFunction(g.space, MeasureSpace.counting(1), np.eye(32)[:, :1])
    fam = ops.semigroup_family(g, f, lab.time_grid(cfg, refined=True))
    q = cfg.q
    for lam in cfg.grid.lambdas:
        counts = np.array([jump_count(fam.values[:, j, 0], lam).count for j in range(32)])
        powers = np.array([vq_norm(fam.values[:, j, 0], q).power for j in range(32)])
        assert np.all(lam ** q * counts <= powers)
        for K in cfg.grid.ks:
            row = next(r for r in rows if r.lam == lam and r.K == K)
            assert row.tail_mass == float(np.sum(counts > K))
            assert 0 <= row.tail_mass <= row.total_mass
            assert row.tail_mass <= row.scaled_bound
    assert info["pointwise_violations"] == 0


def test_jump_profile_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        lab.jump_profile(cfg_for("jump_profile", "lazy_walk(8)"), lambdas=(0.0,), Ks=(1,))


# --- convergence ----------------------------------------------------------------

def test_convergence_zero_generator():
    cfg = cfg_for("convergence", "cycle_laplacian(4)",
                  grid=GridConfig(average_grid=(1.0, 2.0), decay_grid=(1.0, 2.0), small_t_grid=(0.1, 0.2)))
    res = lab.convergence_profile(cfg, op=zero_generator(4))
    for group in ("average", "decay", "small_t"):
        assert np.all(res.series[group]["error"] == 0)


def test_convergence_scalar_closed_form():
    a = 0.7
    g = ops.Generator(MeasureSpace.counting(1), np.array([[a]]))
    f = LatticeFunction(g.space, MeasureSpace.counting(1), [[-2.5]])
    ts = (0.01, 0.1, 1.0)
    cfg = cfg_for("convergence", "cycle_laplacian(4)",
                  grid=GridConfig(average_grid=(1.0, 2.0), decay_grid=(1.0, 2.0), small_t_grid=ts))
    res = lab.convergence_profile(cfg, op=g, f=f)
    want = np.abs(np.exp(-a * np.array(ts)) - 1) * 2.5
    np.testing.assert_allclose(res.series["small_t"]["error"], want, rtol=1e-13)


def test_convergence_cycle16_gap():
    cfg = cfg_for("convergence", "cycle_laplacian(16)", generator="delta", sigma_dim=1,
                  grid=GridConfig(average_grid=(64.0, 128.0, 256.0, 512.0), decay_grid=(10.0, 20.0, 40.0, 80.0)))
    res = lab.convergence_profile(cfg)
    gap = 2 * (1 - np.cos(2 * np.pi / 16))
    assert res.summary["expected_exponent"] == pytest.approx(gap, rel=1e-10)
    assert 0.5 <= res.summary["decay_exponent"] / gap <= 2.0
    assert abs(res.summary["average_slope"] + 1) <= 0.2
    assert not res.flags


# --- probes ---------------------------------------------------------------------

def test_ell1_probe_trends():
    cfg = load_config(CONFIGS / "ell1_probe_lazy_walk64.ini")
    res = lab.ell1_probe(cfg)
    s = res.series["ell1"]
    assert s["sigma_dim"][0] == 1
    assert s["r1_sup_ratio"][0] == pytest.approx(s["r2_sup_ratio"][0], rel=1e-13)
    assert np.all(np.diff(s["r1_sup_ratio"]) >= 0)
    assert s["r2_sup_ratio"].max() <= 1.1 * s["r2_sup_ratio"].min()
    path = BASELINES / "ell1_probe_lazy_walk64.json"
    current = {k: list(v) for k, v in s.items()}
    if not path.exists():
        path.write_text(json.dumps(current, indent=1) + "\n")
    np.testing.assert_allclose(s["r2_sup_ratio"], json.loads(path.read_text())["r2_sup_ratio"], rtol=1e-9)


def test_weighted_probe_constant_weight_matches_plain():
    cfg = cfg_for("weighted_variational", "shift(32)", weight="constant(32)", sigma_dim=1, count=10)
    est, det = lab.weighted_variational_probe(cfg)
    plain = lab.estimate_variational_constant(cfg.replace(kind="variational_Z", weight=""))
    assert est.ratios.tobytes() == plain.ratios.tobytes()
    assert det.value == 1.0


def test_weighted_probe_step_records_characteristic():
    cfg = load_config(CONFIGS / "weighted_step64.ini")
    res = lab.run_experiment(cfg)
    assert res.summary["ap_characteristic"] == 1.125
    assert np.isfinite(res.summary["sup_ratio"])


def test_weighted_probe_validation():
    with pytest.raises(ValidationError, match="sigma_dim"):
        lab.weighted_variational_probe(cfg_for("weighted_variational", "shift(32)", weight="step(32)"))
    with pytest.raises(ValidationError, match="weight length"):
        lab.weighted_variational_probe(
            cfg_for("weighted_variational", "shift(32)", weight="step(16)", sigma_dim=1))


def test_weighted_sweep_reports_trend():
    cfg = cfg_for("weighted_variational", "shift(32)", weight="constant(32)", sigma_dim=1, count=10)
    res = lab.weighted_sweep(cfg, (0.0, 0.5, 0.9))
    chars = res.series["sweep"]["ap_characteristic"]
    assert np.all(np.diff(chars) >= 0) and chars[0] == 1.0
    assert "sup_nondecreasing_in_characteristic" in res.summary


def test_build_weight_variants():
    w = lab.build_weight("step(6)")
    assert w.offset == -3 and list(w.values) == [1, 1, 1, 2, 2, 2]
    assert list(lab.build_weight("power(4, 2)").values) == [4.0, 1.0, 1.0, 1.0]
    with pytest.raises(ValidationError):
        lab.build_weight("bogus(3)")


def test_q_override_flag():
    cfg = cfg_for("variational_ergodic", "lazy_walk(8)", q=2.0, allow_small_q=True, count=2)
    assert "Q_OVERRIDE" in lab.run_experiment(cfg).flags
