"""Gaussian smoothing of a density and of an empirical measure: realised distances vs bounds.

Part 1 smooths 1-D densities on [0, 1] with the total-variation rule and
reports the grid d_TV next to epsilon. Part 2 estimates E||M|| for the
bounded-Lipschitz rule in several dimensions.
"""

from __future__ import annotations

import numpy as np

from cik import approx
from cik.rng import substream


def densities(grid):
    inside = (grid >= 0) & (grid <= 1)
    return {
        "triangle": (np.clip(2.0 - 4.0 * np.abs(grid - 0.5), 0.0, None), 4.0),
        "ramp 2x": (np.where(inside, 2.0 * grid, 0.0), 2.0),
        "raised cosine": (np.where(inside, 1.0 - np.cos(2 * np.pi * grid), 0.0), 2 * np.pi),
    }


def main():
    grid = np.arange(-1.0, 2.0 + 5e-5, 1e-4)
    print(f"{'density':>14} {'lip':>6} {'eps':>5} {'c':>10} {'d_TV':>8}")
    for name, (f, lip) in densities(grid).items():
        for eps in (0.05, 0.1, 0.2, 0.5):
            c = approx.smoothing_variance(eps, 1, "tv", lip_b=lip, vol_B=1.2)
            d = approx.dtv_estimate(f, approx.smooth_density_1d(f, grid, c), grid).value
            print(f"{name:>14} {lip:6.3g} {eps:5.2f} {c:10.3e} {d:8.5f}")

    rng = substream(0, 1)
    print(f"\n{'p':>3} {'eps':>5} {'E|M|':>8} {'se':>8} {'eps/sqrt2':>9}")
    for p in (1, 2, 5, 20):
        for eps in (0.1, 0.2):
            m = approx.SmoothedMeasure.build(rng.standard_normal((25, p)), eps)
            r = approx.dbl_bound_check(m, 200_000, rng)
            print(f"{p:3d} {eps:5.2f} {r.estimate:8.5f} {r.se:8.1e} {r.bound:9.5f}")


if __name__ == "__main__":
    main()
