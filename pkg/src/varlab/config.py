"""Experiment configuration: a sectioned ``key = value`` text format.

Parsing accepts comments, any key order and loose number spelling.  The
serializer always writes every section and key in a fixed order with
canonical number formatting, so ``serialize(parse(text)) == text`` for any
text that was itself produced by ``serialize``.  The checksum is the SHA-256
of that canonical form.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import re
from dataclasses import dataclass, field
from pathlib import Path

from .ensembles import ENSEMBLE_CHOICES
from .errors import ValidationError

KINDS = (
    "variational_Z",
    "variational_ergodic",
    "variational_semigroup_discrete",
    "variational_semigroup_continuous",
    "maximal",
    "square_function",
    "jump_profile",
    "convergence",
    "weighted_variational",
    "ell1_probe",
)
# kinds whose inequality is stated for q > 2 only
Q_RESTRICTED = (
    "variational_Z",
    "variational_ergodic",
    "variational_semigroup_discrete",
    "variational_semigroup_continuous",
    "jump_profile",
    "weighted_variational",
)


@dataclass(frozen=True)
class EnsembleConfig:
    count: int = 200
    generator: str = "all"
    seed: int = 0
    sigma_dim: int = 4


@dataclass(frozen=True)
class GridConfig:
    n_max: int = 64
    t_min: float = 1e-3
    t_max: float = 100.0
    t_points: int = 64
    refine: bool = True
    lambdas: tuple = (0.05, 0.1, 0.2, 0.4)
    ks: tuple = (1, 2, 4)
    sigma_dims: tuple = (1, 2, 4, 8, 16)
    average_grid: tuple = (256.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0, 16384.0)
    decay_grid: tuple = (100.0, 200.0, 400.0, 800.0)
    small_t_grid: tuple = (1e-5, 1e-4, 1e-3, 1e-2)


@dataclass(frozen=True)
class ToleranceConfig:
    tail_ratio: float = 1e-6
    refine_rel_tol: float = 1e-3
    quad_tol: float = 1e-12
    analyticity_n: int = 256
    square_n_max: int = 4000


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str
    operator: str
    p: float = 2.0
    q: float = 3.0
    r: float = 2.0
    m: int = 0
    allow_small_q: bool = False
    weight: str = ""
    name: str = ""
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    grid: GridConfig = field(default_factory=GridConfig)
    tolerances: ToleranceConfig = field(default_factory=ToleranceConfig)
    # directory that relative fixture paths resolve against; not serialized
    base_dir: str = field(default=".", compare=False)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return self.replace(ensemble=dataclasses.replace(self.ensemble, seed=int(seed)))

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else Path(self.base_dir) / p


# section name -> (dataclass attribute or None for top level, field names)
_LAYOUT = (
    ("experiment", None, ("name", "kind", "allow_small_q")),
    ("operator", None, ("operator", "weight")),
    ("norms", None, ("p", "q", "r", "m")),
    ("ensemble", "ensemble", tuple(f.name for f in dataclasses.fields(EnsembleConfig))),
    ("grid", "grid", tuple(f.name for f in dataclasses.fields(GridConfig))),
    ("tolerances", "tolerances", tuple(f.name for f in dataclasses.fields(ToleranceConfig))),
)
# the operator section spells its keys as "spec" and "weight"
_ALIASES = {("operator", "operator"): "spec"}

_TYPES = {
    **{f.name: f.type for f in dataclasses.fields(ExperimentConfig)},
    **{f.name: f.type for f in dataclasses.fields(EnsembleConfig)},
    **{f.name: f.type for f in dataclasses.fields(GridConfig)},
    **{f.name: f.type for f in dataclasses.fields(ToleranceConfig)},
}
_INT_TUPLES = {"ks", "sigma_dims"}


def _fmt_float(x: float) -> str:
    return repr(float(x))


def _fmt(name, value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        conv = str if name in _INT_TUPLES else _fmt_float
        return ", ".join(conv(v) for v in value)
    if isinstance(value, float):
        return _fmt_float(value)
    return str(value)


def _convert(section, key, name, raw: str):
    kind = _TYPES[name]
    where = f"[{section}] {key}"
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low not in ("true", "false", "yes", "no", "1", "0"):
                raise ValueError
            return low in ("true", "yes", "1")
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "tuple":
            parts = [s for s in re.split(r"[,\s]+", raw) if s]
            return tuple(int(s) if name in _INT_TUPLES else float(s) for s in parts)
    except ValueError:
        raise ValidationError(f"{where}: cannot read {raw!r} as {kind}") from None
    return raw


def parse_config(text: str, base_dir: str = ".") -> ExperimentConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ValidationError(f"config syntax: {exc}") from None
    known = {s for s, _, _ in _LAYOUT}
    for section in cp.sections():
        if section not in known:
            raise ValidationError(f"unknown config section [{section}]")
    top, nested = {}, {}
    for section, attr, names in _LAYOUT:
        keys = {_ALIASES.get((section, n), n): n for n in names}
        if not cp.has_section(section):
            continue
        for key, raw in cp.items(section):
            if key not in keys:
                raise ValidationError(f"[{section}] unknown key {key!r}")
            value = _convert(section, key, keys[key], raw)
            if attr is None:
                top[keys[key]] = value
            else:
                nested.setdefault(attr, {})[keys[key]] = value
    for need in ("kind", "operator"):
        if need not in top:
            sec = "experiment" if need == "kind" else "operator"
            key = _ALIASES.get((sec, need), need)
            raise ValidationError(f"[{sec}] {key}: missing required key")
    cfg = ExperimentConfig(
        **top,
        ensemble=EnsembleConfig(**nested.get("ensemble", {})),
        grid=GridConfig(**nested.get("grid", {})),
        tolerances=ToleranceConfig(**nested.get("tolerances", {})),
        base_dir=str(base_dir),
    )
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text, base_dir=str(path.parent))


def serialize_config(cfg: ExperimentConfig) -> str:
    out = []
    for section, attr, names in _LAYOUT:
        holder = cfg if attr is None else getattr(cfg, attr)
        out.append(f"[{section}]")
        for n in names:
            out.append(f"{_ALIASES.get((section, n), n)} = {_fmt(n, getattr(holder, n))}")
        out.append("")
    return "\n".join(out)


def config_checksum(cfg: ExperimentConfig) -> str:
    return hashlib.sha256(serialize_config(cfg).encode("utf-8")).hexdigest()


def config_dict(cfg: ExperimentConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d.pop("base_dir")
    for sub in ("ensemble", "grid", "tolerances"):
        d[sub] = {k: list(v) if isinstance(v, tuple) else v for k, v in d[sub].items()}
    return d


def _increasing_positive(name, values):
    if not values:
        raise ValidationError(f"[grid] {name}: must not be empty")
    if any(not v > 0 for v in values) or any(b <= a for a, b in zip(values, values[1:])):
        raise ValidationError(f"[grid] {name}: must be positive and strictly increasing")


def validate(cfg: ExperimentConfig) -> None:
    if cfg.kind not in KINDS:
        raise ValidationError(f"[experiment] kind: {cfg.kind!r} is not one of {', '.join(KINDS)}")
    if not cfg.p > 1:
        raise ValidationError(f"[norms] p: need p > 1, got {cfg.p}")
    if not cfg.q >= 1:
        raise ValidationError(f"[norms] q: need q >= 1, got {cfg.q}")
    if cfg.kind in Q_RESTRICTED and not cfg.q > 2 and not cfg.allow_small_q:
        raise ValidationError(
            f"[norms] q: {cfg.kind} requires q > 2 (got {cfg.q}); set allow_small_q = true to override"
        )
    if cfg.kind != "ell1_probe" and not cfg.r > 1:
        raise ValidationError(f"[norms] r: need r > 1 outside ell1_probe, got {cfg.r}")
    if not cfg.r >= 1:
        raise ValidationError(f"[norms] r: need r >= 1, got {cfg.r}")
    if cfg.m < 0:
        raise ValidationError(f"[norms] m: need m >= 0, got {cfg.m}")
    e = cfg.ensemble
    if e.count < 1:
        raise ValidationError("[ensemble] count: need at least one member")
    if e.generator not in ENSEMBLE_CHOICES:
        raise ValidationError(f"[ensemble] generator: {e.generator!r} is not one of {ENSEMBLE_CHOICES}")
    if e.sigma_dim < 1:
        raise ValidationError("[ensemble] sigma_dim: need >= 1")
    g = cfg.grid
    if g.n_max < 1:
        raise ValidationError("[grid] n_max: need >= 1")
    if not 0 < g.t_min < g.t_max:
        raise ValidationError("[grid] t_min/t_max: need 0 < t_min < t_max")
    if g.t_points < 2:
        raise ValidationError("[grid] t_points: need >= 2")
    for name in ("lambdas", "ks", "sigma_dims", "average_grid", "decay_grid", "small_t_grid"):
        _increasing_positive(name, getattr(g, name))
    t = cfg.tolerances
    if not (t.tail_ratio > 0 and t.refine_rel_tol > 0 and t.quad_tol > 0):
        raise ValidationError("[tolerances]: tolerances must be > 0")
    if t.analyticity_n < 2 or t.square_n_max < 1:
        raise ValidationError("[tolerances]: analyticity_n >= 2 and square_n_max >= 1 required")
    if cfg.kind == "variational_Z":
        m = re.fullmatch(r"\s*shift\(\s*(\d+)\s*\)\s*", cfg.operator)
        if not m:
            raise ValidationError("[operator] spec: variational_Z runs on Z_N and needs shift(N)")
        if 4 * g.n_max > int(m.group(1)):
            raise ValidationError(
                f"[grid] n_max: averages on Z_N need n_max <= N/4 (N = {m.group(1)}, n_max = {g.n_max})"
            )
    if cfg.kind == "weighted_variational" and not cfg.weight:
        raise ValidationError("[operator] weight: weighted_variational needs a weight")
