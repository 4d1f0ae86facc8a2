"""Weighted variational constant against the A_p characteristic of power weights.

usage: python3 scripts/weighted_sweep.py [CONFIG]
"""

import sys
from pathlib import Path

import numpy as np

from varlab import lab
from varlab.config import load_config
from varlab.weights import ap_trend

ROOT = Path(__file__).resolve().parents[1]
ALPHAS = (0.0, 0.1, 0.2, 0.3, 0.5)


def main(config=ROOT / "configs" / "weighted_step64.ini"):
    cfg = load_config(config)
    res = lab.weighted_sweep(cfg, ALPHAS)
    s = res.series["sweep"]
    for a, c, v in zip(s["alpha"], s["ap_characteristic"], s["sup_ratio"]):
        print(f"alpha = {a:4.2f}  [w]_A{cfg.p:g} = {c:.6f}  sup_ratio = {v:.6f}")
    print("sup nondecreasing in characteristic:", bool(res.summary["sup_nondecreasing_in_characteristic"]))
    for a in (0.3, 1.5):
        tr = ap_trend(lambda n, a=a: np.maximum(np.abs(n), 1.0) ** a, cfg.p)
        print(f"alpha = {a}: characteristic {'stabilizes' if tr.finite else 'keeps growing'} "
              f"over windows {tr.windows[0]}..{tr.windows[-1]}")


if __name__ == "__main__":
    main(*sys.argv[1:])
