"""Growth of the L^1-valued (r = 1) constant with sigma dimension, with the r = 2 arm as control.

usage: python3 scripts/ell1_probe.py [CONFIG]
"""

import sys
from pathlib import Path

from varlab import lab
from varlab.config import load_config

ROOT = Path(__file__).resolve().parents[1]


def main(config=ROOT / "configs" / "ell1_probe_lazy_walk64.ini"):
    res = lab.ell1_probe(load_config(config))
    s = res.series["ell1"]
    cols = [c for c in s if c != "sigma_dim"]
    print("sigma_dim  " + "  ".join(f"{c:>14s}" for c in cols))
    for i, d in enumerate(s["sigma_dim"]):
        print(f"{int(d):9d}  " + "  ".join(f"{s[c][i]:14.6f}" for c in cols))
    print({k: round(v, 6) for k, v in res.summary.items()}, res.flags or "")


if __name__ == "__main__":
    main(*sys.argv[1:])
