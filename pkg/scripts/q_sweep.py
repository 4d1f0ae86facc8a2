"""Variational constant as q decreases towards 2 on a fixed ensemble.

The constant should be nonincreasing in q and is expected to grow as q -> 2.

usage: python3 scripts/q_sweep.py [CONFIG]
"""

import sys
from pathlib import Path

from varlab import lab
from varlab.config import load_config

ROOT = Path(__file__).resolve().parents[1]


def main(config=ROOT / "configs" / "lazy_walk64_ergodic.ini"):
    cfg = load_config(config).replace(allow_small_q=True)
    res = lab.q_sweep(cfg, qs=(2.01, 2.05, 2.1, 2.25, 2.5, 3.0, 4.0))
    for q, s in zip(res.series["q"]["q"], res.series["q"]["sup_ratio"]):
        print(f"q = {q:5.2f}  sup_ratio = {s:.6f}")
    print("nonincreasing in q:", bool(res.summary["nonincreasing_in_q"]), res.flags or "")


if __name__ == "__main__":
    main(*sys.argv[1:])
