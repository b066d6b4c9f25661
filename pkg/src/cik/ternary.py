"""Three-valued covariates with a beta-mixed lam.

P(X_i = 0 | lam) = lam (1 - c_i), P(X_i = 1 | lam) = lam c_i,
P(X_i = 2 | lam) = 1 - lam, and lam ~ Beta(a, b). All gamma-function ratios
are evaluated in log space.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.special import betaln

from cik.models import DomainError, SizeError, check_support

MAX_TABLE_P = 12


def _row(spec, x):
    x = check_support(spec, x)
    if x.ndim != 1:
        raise DomainError("expected a single vector")
    return x


def _log_labels(spec, x):
    """sum over S1 of log c_i plus sum over S0 of log(1 - c_i)."""
    c = np.asarray(spec.c)
    return float(np.log(c) @ (x == 1) + np.log1p(-c) @ (x == 0))


def log_density_x(spec, x):
    x = _row(spec, x)
    p = spec.p
    m2 = int(np.sum(x == 2))
    return (
        betaln(spec.a + p - m2, spec.b + m2) - betaln(spec.a, spec.b) + _log_labels(spec, x)
    )


def log_density_joint(spec, x, x_tilde):
    x = _row(spec, x)
    xt = _row(spec, x_tilde)
    p = spec.p
    m2 = int(np.sum(x == 2))
    n2 = int(np.sum(xt == 2))
    return (
        betaln(spec.a + 2 * p - m2 - n2, spec.b + m2 + n2)
        - betaln(spec.a, spec.b)
        # grouped so the value is bitwise symmetric in (x, x~)
        + (_log_labels(spec, x) + _log_labels(spec, xt))
    )


def log_density_joint_rows(spec, xs, xts):
    """Vectorised :func:`log_density_joint` over rows of ``xs`` and ``xts``."""
    xs = check_support(spec, xs)
    xts = check_support(spec, xts)
    c = np.asarray(spec.c)
    lc, l1c = np.log(c), np.log1p(-c)
    m2 = np.sum(xs == 2, axis=1)
    n2 = np.sum(xts == 2, axis=1)
    lab_x = (xs == 1) @ lc + (xs == 0) @ l1c
    lab_t = (xts == 1) @ lc + (xts == 0) @ l1c
    return (
        betaln(spec.a + 2 * spec.p - m2 - n2, spec.b + m2 + n2)
        - betaln(spec.a, spec.b)
        + (lab_x + lab_t)
    )


def pmf_x(spec, x):
    return float(np.exp(log_density_x(spec, x)))


def pmf_joint(spec, x, x_tilde):
    return float(np.exp(log_density_joint(spec, x, x_tilde)))


def all_points(p):
    if p > MAX_TABLE_P:
        raise SizeError(f"3^{p} table too large; use sample_knockoff instead")
    return np.array(list(itertools.product((0, 1, 2), repeat=p)), dtype=np.int64)


def conditional_pmf(spec, x):
    """Exact law of the knockoff given ``X = x`` as ``(points, probs)`` over {0,1,2}^p.

    Depends on ``x`` only through the number of 2s it contains.
    """
    x = _row(spec, x)
    p = spec.p
    pts = all_points(p)
    m2 = int(np.sum(x == 2))
    n2 = np.sum(pts == 2, axis=1)
    c = np.asarray(spec.c)
    labels = (pts == 1) @ np.log(c) + (pts == 0) @ np.log1p(-c)
    logp = (
        betaln(spec.a + 2 * p - m2 - n2, spec.b + m2 + n2)
        - betaln(spec.a + p - m2, spec.b + m2)
        + labels
    )
    return pts, np.exp(logp)


def _draw_given_lambda(c, lam, rng):
    u = rng.uniform(size=lam.shape + c.shape)
    lam = lam[..., None]
    out = np.where(u < 1.0 - lam, 2.0, np.where(u < 1.0 - lam + lam * c, 1.0, 0.0))
    return out


def sample_x(spec, rng, n=None):
    c = np.asarray(spec.c)
    lam = np.asarray(rng.beta(spec.a, spec.b, size=() if n is None else (n,)))
    return _draw_given_lambda(c, lam, rng)


def sample_knockoff(spec, x, rng, return_lambda=False):
    """lam | x ~ Beta(a + p - m2, b + m2), then each X~_i independently given lam."""
    x = check_support(spec, x)
    m2 = np.sum(x == 2, axis=-1)
    lam = np.asarray(rng.beta(spec.a + spec.p - m2, spec.b + m2))
    xt = _draw_given_lambda(np.asarray(spec.c), lam, rng)
    return (xt, lam) if return_lambda else xt


def sample_latent(spec, rng, n=None):
    return rng.beta(spec.a, spec.b, size=n)


def sample_given_latent(spec, lam, rng):
    return _draw_given_lambda(np.asarray(spec.c), np.asarray(lam, dtype=float), rng)


def log_pmf_blocks(spec, blocks):
    """log P(V = v) for k conditionally independent blocks sharing one lam; ``blocks`` is (k, p)."""
    v = np.asarray(blocks)
    n_all = v.size
    m2 = int(np.sum(v == 2))
    c = np.asarray(spec.c)
    labels = np.sum((v == 1) @ np.log(c)) + np.sum((v == 0) @ np.log1p(-c))
    return betaln(spec.a + n_all - m2, spec.b + m2) - betaln(spec.a, spec.b) + labels
