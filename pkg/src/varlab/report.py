"""Report writers: long-format CSV, JSON and a run manifest, written atomically.

report.csv columns
    group  ``summary`` for scalars, otherwise the series group name
    name   scalar or column name
    index  0 for scalars, row position within the series
    value  '%.16e' (17 significant digits); nan and inf spelled as such

report.json mirrors the same content (non-finite numbers become null) and
validates against ``report.schema.json`` shipped with the package.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_checksum, serialize_config
from .lab import ExperimentResult

SCHEMA_VERSION = 1
CSV_COLUMNS = ("group", "name", "index", "value")


def atomic_write(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _num(x: float) -> str:
    return "%.16e" % x


def csv_text(res: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for name, value in res.summary.items():
        w.writerow(("summary", name, 0, _num(value)))
    for group, cols in res.series.items():
        for name, col in cols.items():
            for i, v in enumerate(np.asarray(col, dtype=float)):
                w.writerow((group, name, i, _num(v)))
    return buf.getvalue()


def _finite_or_none(x):
    x = float(x)
    return x if math.isfinite(x) else None


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return _finite_or_none(obj)
    return obj


def report_dict(res: ExperimentResult, cfg: ExperimentConfig) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "kind": res.kind,
        "name": cfg.name,
        "config_checksum": config_checksum(cfg),
        "seed": cfg.ensemble.seed,
        "summary": {k: _finite_or_none(v) for k, v in res.summary.items()},
        "series": {g: {n: [_finite_or_none(v) for v in np.asarray(c, float)] for n, c in cols.items()}
                   for g, cols in res.series.items()},
        "flags": list(res.flags),
        "info": _plain(res.info),
    }


def load_schema() -> dict:
    return json.loads(resources.files("varlab").joinpath("report.schema.json").read_text())


def write_report(res: ExperimentResult, cfg: ExperimentConfig, out_dir, *,
                 started: datetime | None = None, config_path=None, threads: int | None = None) -> dict:
    """Write report.csv, report.json, config.ini and manifest.json; return the manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = started or datetime.now(timezone.utc)
    paths = {name: out / name for name in ("report.csv", "report.json", "config.ini", "manifest.json")}
    atomic_write(paths["report.csv"], csv_text(res))
    atomic_write(paths["report.json"], json.dumps(report_dict(res, cfg), indent=2, sort_keys=True) + "\n")
    atomic_write(paths["config.ini"], serialize_config(cfg))
    manifest = {
        "config_checksum": config_checksum(cfg),
        "artifact_version": __version__,
        "seed": cfg.ensemble.seed,
        "started_utc": started.isoformat(),
        "finished_utc": datetime.now(timezone.utc).isoformat(),
        "threads": threads,
        "config_path": None if config_path is None else str(config_path),
        "outputs": {k: str(v) for k, v in paths.items() if k != "manifest.json"},
        "flags": list(res.flags),
    }
    atomic_write(paths["manifest.json"], json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest
