"""Knockoff selection: lasso coefficient-difference statistics and the knockoff(+) threshold."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cik import lasso


class PowerUndefinedError(ValueError):
    """Power requested with an empty true support."""


@dataclass
class RegressionData:
    design: np.ndarray
    response: np.ndarray
    knockoffs: np.ndarray

    def __post_init__(self):
        self.design = np.asarray(self.design, dtype=float)
        self.response = np.asarray(self.response, dtype=float).ravel()
        self.knockoffs = np.asarray(self.knockoffs, dtype=float)
        n, p = self.design.shape
        if self.knockoffs.shape != (n, p) or self.response.shape != (n,):
            raise lasso.InputError(
                f"inconsistent shapes: X {self.design.shape}, X~ {self.knockoffs.shape}, "
                f"y {self.response.shape}"
            )
        for name in ("design", "response", "knockoffs"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise lasso.InputError(f"non-finite entries in {name}")

    @property
    def p(self):
        return self.design.shape[1]


@dataclass
class WStatistics:
    w: np.ndarray
    threshold: float
    selected: np.ndarray
    q_target: float
    plus_variant: bool = True
    reg: float = float("nan")

    def to_dict(self):
        return {
            "threshold": None if not np.isfinite(self.threshold) else float(self.threshold),
            "selected": [int(i) for i in self.selected],
            "w": [float(v) for v in self.w],
        }


def coef_diff_stats(data, reg_grid=None, folds=5, rng=None, n_lambda=50, ratio=1e-3):
    """w_i = |b_i| - |b_{p+i}| from the lasso on [X, X~] at a cross-validated penalty.

    Coefficients are compared on the standardized scale. ``reg_grid`` defaults
    to ``n_lambda`` log-spaced values from lambda_max down to ``ratio`` times it.
    Returns ``(w, reg)``.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    Xa = np.hstack([data.design, data.knockoffs])
    st = lasso.Standardized(Xa, data.response)
    grid = lasso.lambda_grid(st.lambda_max, n_lambda, ratio) if reg_grid is None else np.asarray(reg_grid)
    k = lasso.cv_lambda(Xa, data.response, grid, folds, rng)
    path = lasso.lasso_path(st, grid[: k + 1], saturation=None)
    beta = path[-1]
    p = data.p
    return np.abs(beta[:p]) - np.abs(beta[p:]), float(grid[k])


def knockoff_threshold(w, q, plus=True):
    """Smallest t among the nonzero |w_i| with (plus + #{w <= -t}) / max(#{w >= t}, 1) <= q.

    Returns +inf when no candidate qualifies.
    """
    if not 0 < q < 1:
        raise ValueError("q must lie in (0, 1)")
    w = np.asarray(w, dtype=float)
    cands = np.unique(np.abs(w[w != 0]))
    offset = 1.0 if plus else 0.0
    for t in cands:
        ratio = (offset + np.sum(w <= -t)) / max(np.sum(w >= t), 1)
        if ratio <= q:
            return float(t)
    return float("inf")


def select(w, q, plus=True):
    t = knockoff_threshold(w, q, plus)
    w = np.asarray(w, dtype=float)
    return WStatistics(w, t, np.flatnonzero(w >= t), q, plus)


def run_filter(data, q=0.1, plus=True, rng=None, folds=5):
    w, reg = coef_diff_stats(data, folds=folds, rng=rng)
    res = select(w, q, plus)
    res.reg = reg
    return res


def fdr_power(selected, true_support):
    """(false discovery proportion, power) of a selection."""
    sel = set(int(i) for i in selected)
    true = set(int(i) for i in true_support)
    if not true:
        raise PowerUndefinedError("power is undefined for an empty true support")
    fdp = len(sel - true) / max(len(sel), 1)
    return fdp, len(sel & true) / len(true)


def fdp(selected, true_support):
    sel = set(int(i) for i in selected)
    return len(sel - set(int(i) for i in true_support)) / max(len(sel), 1)
