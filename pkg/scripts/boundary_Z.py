"""Periodic boundary check for averages on Z_N: N against 2N at a fixed window.

With n_max <= N/4 the averages never wrap far enough to see the period, so the
two estimates should agree up to sampling of the ensemble.

usage: python3 scripts/boundary_Z.py [N] [N_MAX]
"""

import sys

from varlab import lab
from varlab.config import EnsembleConfig, ExperimentConfig, GridConfig


def estimate(n, n_max, count=100):
    cfg = ExperimentConfig("variational_Z", f"shift({n})", ensemble=EnsembleConfig(count, "all", 7, 4),
                           grid=GridConfig(n_max=n_max))
    return lab.estimate_variational_constant(cfg)


def main(n="64", n_max="16"):
    n, n_max = int(n), int(n_max)
    a, b = estimate(n, n_max), estimate(2 * n, n_max)
    print(f"N = {n:4d}: sup_ratio {a.sup_ratio:.6f}, mean {a.ratios.mean():.6f}")
    print(f"N = {2 * n:4d}: sup_ratio {b.sup_ratio:.6f}, mean {b.ratios.mean():.6f}")
    print(f"relative change in sup_ratio: {b.sup_ratio / a.sup_ratio - 1:+.3%}")


if __name__ == "__main__":
    main(*sys.argv[1:])
