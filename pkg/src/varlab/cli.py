"""Command-line front end.

Exit codes: 0 success, 1 failed check or unexpected error, 2 validation
error (bad config, fixture or flag), 3 certificate or tail-diagnostic failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

import numpy as np

from . import lab
from . import operators as ops
from .config import ExperimentConfig, EnsembleConfig, GridConfig, load_config
from .errors import CertificateError, TailError, ValidationError, VarlabError
from .io import load_weight
from .lattice import LatticeFunction, MeasureSpace
from .report import _plain, write_report
from .variation import ScalarSequence, jump_count, vq_norm
from .weights import Weight, ap_characteristic_detail

IDENTITY_TOL = 1e-10


def _floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.replace(";", ",").split(",") if x.strip())
    except ValueError:
        raise ValidationError(f"cannot read {text!r} as a comma-separated list of numbers") from None


def _emit(obj) -> None:
    print(json.dumps(_plain(obj), indent=2, sort_keys=True))


def cmd_run(args) -> int:
    started = datetime.now(timezone.utc)
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    res = lab.run_experiment(cfg)
    manifest = write_report(res, cfg, args.out_dir, started=started, config_path=args.config,
                            threads=lab.worker_count())
    _emit({"out_dir": args.out_dir, "flags": res.flags, "config_checksum": manifest["config_checksum"]})
    return 0


def cmd_variation(args) -> int:
    res = vq_norm(ScalarSequence.from_values(_floats(args.values)), args.q)
    _emit({"norm": res.norm, "power": res.power, "witness": list(res.witness)})
    return 0


def cmd_jump(args) -> int:
    res = jump_count(ScalarSequence.from_values(_floats(args.values)), args.lam)
    _emit({"count": res.count, "pairs": [list(p) for p in res.pairs]})
    return 0


def cmd_estimate(args) -> int:
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    res = lab.run_experiment(cfg)
    _emit({"kind": res.kind, "summary": res.summary, "flags": res.flags, "info": res.info})
    return 0


def _adhoc_config(args, kind: str, **grid) -> ExperimentConfig:
    return ExperimentConfig(
        kind=kind,
        operator=args.operator,
        p=args.p,
        r=getattr(args, "r", 2.0),
        ensemble=EnsembleConfig(count=getattr(args, "count", 1), generator=args.ensemble,
                                seed=args.seed, sigma_dim=getattr(args, "sigma_dim", 1)),
        grid=GridConfig(**grid),
    )


def cmd_convergence(args) -> int:
    grid = {}
    for key in ("average_grid", "decay_grid", "small_t_grid"):
        if getattr(args, key) is not None:
            grid[key] = _floats(getattr(args, key))
    res = lab.convergence_profile(_adhoc_config(args, "convergence", **grid))
    _emit({"summary": res.summary, "series": res.series, "flags": res.flags})
    return 0


def cmd_identity_check(args) -> int:
    op = ops.parse_operator(args.operator)
    rng = np.random.default_rng(args.seed)
    worst = {"decomposition_residual": 0.0, "doubling_residual": 0.0}
    checked = 0
    for _ in range(args.count):
        f = LatticeFunction(op.space, MeasureSpace.counting(args.sigma_dim),
                            rng.standard_normal((op.size, args.sigma_dim)))
        if isinstance(op, ops.Generator):
            t = float(rng.uniform(0.05, 1.0))
            single, pair = op.semigroup(t, cache=False), (op.semigroup(t, cache=False), op.semigroup(2 * t, cache=False))
        else:
            single, pair = op, None
        for n in range(1, args.n_max + 1):
            for m in range(args.m_max + 1):
                res = ops.identity_residuals(single, f, n, m, doubling_pair=pair)
                for k in worst:
                    worst[k] = max(worst[k], res[k])
                checked += 1
    ok = max(worst.values()) <= IDENTITY_TOL
    _emit({"operator": args.operator, "instances": checked, "max_residuals": worst,
           "tolerance": IDENTITY_TOL, "passed": ok})
    return 0 if ok else 1


def cmd_probe_ell1(args) -> int:
    cfg = _adhoc_config(args, "ell1_probe", n_max=args.n_max, sigma_dims=tuple(int(d) for d in _floats(args.sigma_dims)))
    res = lab.ell1_probe(cfg)
    _emit({"summary": res.summary, "series": res.series, "note": res.info["note"]})
    return 0


def cmd_weights(args) -> int:
    if args.fixture:
        w = load_weight(args.fixture)
    elif args.values:
        w = Weight(np.array(_floats(args.values)), args.offset)
    else:
        raise ValidationError("weights needs --fixture or --values")
    det = ap_characteristic_detail(w, args.p, args.max_len)
    _emit({"characteristic": det.value, "interval_start": det.start, "interval_length": det.length,
           "max_len": det.max_len, "p": args.p})
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="varlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a config and write report.csv, report.json, manifest.json")
    p.add_argument("config")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=None, help="override the config seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("variation", help="q-variation norm of a sequence")
    p.add_argument("--values", required=True, help="comma-separated numbers")
    p.add_argument("--q", type=float, required=True)
    p.set_defaults(func=cmd_variation)

    p = sub.add_parser("jump", help="lambda-jump count of a sequence")
    p.add_argument("--values", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.set_defaults(func=cmd_jump)

    p = sub.add_parser("estimate", help="run a config and print its summary")
    p.add_argument("--config", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_estimate)

    def operator_flags(p, ensemble="delta"):
        p.add_argument("--operator", required=True, help="built-in such as lazy_walk(32)")
        p.add_argument("--p", type=float, default=2.0)
        p.add_argument("--ensemble", default=ensemble)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("convergence", help="convergence rates of averages and semigroups")
    operator_flags(p)
    p.add_argument("--average-grid", dest="average_grid")
    p.add_argument("--decay-grid", dest="decay_grid")
    p.add_argument("--small-t-grid", dest="small_t_grid")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("identity-check", help="residuals of the algebraic identities over a seeded batch")
    p.add_argument("--operator", required=True)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-max", dest="n_max", type=int, default=10)
    p.add_argument("--m-max", dest="m_max", type=int, default=2)
    p.add_argument("--sigma-dim", dest="sigma_dim", type=int, default=2)
    p.set_defaults(func=cmd_identity_check)

    p = sub.add_parser("probe-ell1", help="maximal ratios at r = 1 and r = 2 against the Sigma dimension")
    operator_flags(p, ensemble="spikes")
    p.add_argument("--sigma-dims", dest="sigma_dims", default="1,2,4,8,16")
    p.add_argument("--count", type=int, default=50)
    p.add_argument("--n-max", dest="n_max", type=int, default=64)
    p.set_defaults(func=cmd_probe_ell1)

    p = sub.add_parser("weights", help="A_p characteristic of a weight")
    p.add_argument("--fixture")
    p.add_argument("--values")
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--max-len", dest="max_len", type=int, default=512)
    p.set_defaults(func=cmd_weights)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CertificateError, TailError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except (VarlabError, OverflowError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
