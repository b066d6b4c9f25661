"""Mixing of the gibbs-mix sampler: c-move acceptance and lag autocorrelation of x~ by mh_step."""

from __future__ import annotations

import numpy as np

from cik import gibbs, models
from cik.models import GibbsMixModel
from cik.rng import substream


def autocorr(v, lag):
    v = v - v.mean()
    return float(v[:-lag] @ v[lag:] / (v @ v))


def main():
    spec = GibbsMixModel(6.0, 10.0, 0.5, 2.0, 10)
    rng = substream(0)
    x = models.sample_x(spec, rng)
    print(f"{'mh_step':>8} {'accept':>7} {'acf1':>7} {'acf10':>7}")
    for step in (0.1, 0.25, 0.5, 1.0, 2.0):
        cfg = gibbs.GibbsConfig(burn_in=1000, thin=1, n_draws=20_000, mh_step=step)
        draws, st = gibbs.run_chain(spec, x, cfg, substream(0, 1))
        sq = np.sum(draws**2, axis=1)
        rate = st.n_accept / max(st.n_propose, 1)
        print(f"{step:8.2f} {rate:7.3f} {autocorr(sq, 1):7.3f} {autocorr(sq, 10):7.3f}")


if __name__ == "__main__":
    main()
