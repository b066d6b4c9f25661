"""Checks of the knockoff swap condition, CIK membership and optimality.

Swap invariance is checked exactly on enumerated tables for small discrete
models and by energy two-sample tests otherwise. CIK membership is only ever
refuted: a negative cov(X_i, X~_i) rules it out, anything else is
inconclusive. Extendability is exercised in the constructive direction, by
building k conditionally independent blocks from one latent draw and testing
the within-coordinate block swaps.
"""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from cik import models, stats
from cik.models import JointLawTable, enumerate_joint

EXACT_TOL = 1e-10
MAX_EXACT_P = 3
MAX_EXACT_CELLS = 4096


class NotApplicableError(ValueError):
    pass


@dataclass
class SwapTestReport:
    coordinate: int
    statistic: float
    passed: bool
    method: str
    pvalue: float = float("nan")

    def to_dict(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _pairs(spec, n, rng):
    x = models.sample_x(spec, rng, n)
    return x, models.sample_knockoff(spec, x, rng)


def swap_invariance_test(spec, i, n_draws=1000, rng=None, level=0.01, n_perm=299):
    """Compare L(X, X~) with L(f_i(X, X~)) for coordinate ``i``."""
    if rng is None:
        rng = np.random.default_rng(0)
    if spec.support is not None and spec.p <= MAX_EXACT_P:
        table = enumerate_joint(spec)
        diff = table.max_abs_diff(table.swapped(i))
        return SwapTestReport(i, diff, diff < EXACT_TOL, "ExactTable")
    x1, t1 = _pairs(spec, n_draws, rng)
    x2, t2 = _pairs(spec, n_draws, rng)
    s2, st2 = models.swap(x2, t2, i)
    res = stats.energy_test(np.hstack([x1, t1]), np.hstack([s2, st2]), n_perm, rng)
    return SwapTestReport(i, res.statistic, res.passes(level), "TwoSampleMC", res.pvalue)


def cik_membership_test(joint: JointLawTable, tol=EXACT_TOL):
    """False certifies the table is not a CIK (some cov(X_i, X~_i) < 0); True is inconclusive."""
    return all(joint.cov(i) >= -tol for i in range(joint.p))


def sign_flip_table(p):
    """Fair i.i.d. coins with knockoff X~ = 1 - X: a valid knockoff that is not a CIK."""
    pts = np.array(list(itertools.product((0, 1), repeat=p)), dtype=np.int64)
    return JointLawTable(pts, 1 - pts, np.full(len(pts), 0.5**p))


def independent_copy_table(p):
    """Fair i.i.d. coins with an independent copy as knockoff."""
    pts = np.array(list(itertools.product((0, 1), repeat=p)), dtype=np.int64)
    xs = np.repeat(pts, len(pts), axis=0)
    xts = np.tile(pts, (len(pts), 1))
    return JointLawTable(xs, xts, np.full(len(xs), 0.25**p))


def _module(spec):
    return models._impl(spec)


def extended_sequence(spec, k_blocks, n, rng):
    """n draws of V = (block_0, ..., block_{k-1}), blocks i.i.d. given one latent draw.

    Returns shape (n, k_blocks * p); block 0 and 1 form (X, X~).
    """
    mod = _module(spec)
    latent = mod.sample_latent(spec, rng, n)
    blocks = [mod.sample_given_latent(spec, latent, rng) for _ in range(k_blocks)]
    return np.hstack(blocks)


def _block_swap(v, p, i, j, k):
    v = np.array(v, copy=True)
    a, b = j * p + i, k * p + i
    v[..., [a, b]] = v[..., [b, a]]
    return v


def extendability_check(spec, k_blocks=3, n_draws=600, rng=None, level=0.01, n_triples=None,
                        n_perm=199):
    """Test V* ~ V under swaps of positions j p + i and k p + i of the extended sequence.

    Small discrete models are checked exactly over all cells; otherwise an
    energy test per (i, j, k) triple runs at ``level`` divided by the number
    of triples. Returns a list of per-triple dicts.
    """
    if k_blocks < 3:
        raise ValueError("k_blocks must be >= 3")
    if rng is None:
        rng = np.random.default_rng(0)
    p = spec.p
    triples = [
        (i, j, k) for i in range(p) for j, k in itertools.combinations(range(k_blocks), 2)
    ]
    if n_triples is not None and n_triples < len(triples):
        pick = rng.choice(len(triples), size=n_triples, replace=False)
        triples = [triples[t] for t in sorted(pick)]
    mod = _module(spec)
    exact = spec.support is not None and len(spec.support) ** (k_blocks * p) <= MAX_EXACT_CELLS
    out = []
    if exact:
        cells = np.array(list(itertools.product(spec.support, repeat=k_blocks * p)))
        logp = np.array([mod.log_pmf_blocks(spec, v.reshape(k_blocks, p)) for v in cells])
        index = {tuple(v): n for n, v in enumerate(cells)}
        for i, j, k in triples:
            perm = [index[tuple(_block_swap(v, p, i, j, k))] for v in cells]
            diff = float(np.max(np.abs(np.exp(logp) - np.exp(logp[perm]))))
            out.append(
                {"i": i, "j": j, "k": k, "method": "ExactTable", "statistic": diff,
                 "pass": diff < 1e-12}
            )
        return out
    adj = level / len(triples)
    for i, j, k in triples:
        va = extended_sequence(spec, k_blocks, n_draws, rng)
        vb = _block_swap(extended_sequence(spec, k_blocks, n_draws, rng), p, i, j, k)
        res = stats.energy_test(va, vb, n_perm, rng)
        out.append(
            {"i": i, "j": j, "k": k, "method": "TwoSampleMC", "statistic": res.statistic,
             "pvalue": res.pvalue, "pass": res.pvalue >= adj}
        )
    return out


@dataclass
class OptimalityReport:
    mac: float
    recon_gap: float
    corr: np.ndarray
    r2: np.ndarray


def optimality_report(spec, n_draws=100_000, rng=None):
    """Mean absolute correlation and a regression proxy for the reconstructability gap.

    Only defined for models with E(X_i | latent) = 0.
    """
    if spec.variant not in ("gauss-mix", "gibbs-mix"):
        raise NotApplicableError(
            f"{spec.variant}: E(X_i | latent) is not zero, optimality criteria do not apply"
        )
    if rng is None:
        rng = np.random.default_rng(0)
    x, xt = _pairs(spec, n_draws, rng)
    p = spec.p
    corr = np.array([np.corrcoef(x[:, i], xt[:, i])[0, 1] for i in range(p)])
    r2 = np.empty(p)
    gap = 0.0
    for i in range(p):
        L = np.hstack([np.delete(x, i, axis=1), xt])
        coef, *_ = np.linalg.lstsq(L, x[:, i], rcond=None)
        resid = x[:, i] - L @ coef
        ex2 = np.mean(x[:, i] ** 2)
        r2[i] = 1.0 - np.mean(resid**2) / ex2
        gap += abs(ex2 - np.mean(resid**2))
    return OptimalityReport(float(np.sum(np.abs(corr))), float(gap), corr, r2)


def validate(spec, rng=None, n_draws=1000):
    """Swap tests for every coordinate plus the applicable membership/optimality checks."""
    if rng is None:
        rng = np.random.default_rng(0)
    out = []
    for i in range(spec.p):
        rep = swap_invariance_test(spec, i, n_draws, rng)
        out.append({"check": "swap_invariance", **rep.to_dict()})
    if spec.support is not None and spec.p <= MAX_EXACT_P:
        table = enumerate_joint(spec)
        out.append({"check": "cik_membership", "pass": cik_membership_test(table),
                    "cov": [table.cov(i) for i in range(spec.p)]})
    if spec.variant in ("gauss-mix", "gibbs-mix"):
        rep = optimality_report(spec, 20 * n_draws, rng)
        out.append({"check": "optimality", "mac": rep.mac, "recon_gap": rep.recon_gap,
                    "corr": rep.corr.tolist(), "r2": rep.r2.tolist()})
    return out
