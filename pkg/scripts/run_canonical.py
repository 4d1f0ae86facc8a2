"""Run every config in configs/ and write reports under OUT_DIR/<config name>/.

usage: python3 scripts/run_canonical.py [OUT_DIR]
"""

import sys
import time
from pathlib import Path

from varlab import lab
from varlab.config import load_config
from varlab.report import write_report

ROOT = Path(__file__).resolve().parents[1]


def main(out_root="runs"):
    for path in sorted((ROOT / "configs").glob("*.ini")):
        cfg = load_config(path)
        start = time.perf_counter()
        res = lab.run_experiment(cfg)
        write_report(res, cfg, Path(out_root) / path.stem, config_path=path, threads=lab.worker_count())
        head = ", ".join(f"{k}={v:.6g}" for k, v in list(res.summary.items())[:4])
        flags = f" flags={res.flags}" if res.flags else ""
        print(f"{path.stem:32s} {time.perf_counter() - start:6.1f} s  {head}{flags}")


if __name__ == "__main__":
    main(*sys.argv[1:])
