"""Two-valued covariates: theta = lam * c with lam ~ Uniform(0, 1).

Given lam the coordinates are independent Bernoulli(lam * c_i). Every
probability in this model is an integral over (0, 1) of a polynomial in lam of
degree at most 2p. Those integrals are evaluated with Gauss-Legendre
quadrature of sufficient order, which is exact for polynomials and sums only
positive terms. The alternating elementary-symmetric-polynomial series is kept
as ``pmf_x_series`` / ``pmf_joint_series`` for cross-checking at small p.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from cik.models import DomainError, SizeError, check_support

MAX_TABLE_P = 20
BISECT_TOL = 1e-12


@lru_cache(maxsize=64)
def _gauss01(n):
    """Gauss-Legendre nodes and log-weights on (0, 1)."""
    z, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (z + 1.0), np.log(0.5 * w)


def _nodes_for_degree(deg):
    return _gauss01(int(deg) // 2 + 1)


def esp(c, excluded=()):
    """Elementary symmetric polynomials ``(d_0, ..., d_m)`` of the non-excluded ``c``.

    Built by multiplying out ``prod (1 + c_i z)`` one factor at a time.
    """
    c = np.asarray(c, dtype=float)
    keep = np.ones(len(c), dtype=bool)
    keep[list(excluded)] = False
    vals = c[keep]
    d = np.zeros(len(vals) + 1)
    d[0] = 1.0
    for k, ci in enumerate(vals, start=1):
        d[1 : k + 1] += ci * d[:k]
    return d


def _log_integral(c, ones, zeros):
    """log of  int_0^1 prod_i (lam c_i)^ones_i (1 - lam c_i)^zeros_i dlam."""
    c = np.asarray(c, dtype=float)
    ones = np.asarray(ones, dtype=float)
    zeros = np.asarray(zeros, dtype=float)
    lam, logw = _nodes_for_degree(ones.sum() + zeros.sum())
    integrand = ones.sum() * np.log(lam) + np.log1p(-np.outer(lam, c)) @ zeros
    return float(np.sum(ones * np.log(c)) + logsumexp(logw + integrand))


def _check_row(spec, x):
    x = check_support(spec, x)
    if x.ndim != 1:
        raise DomainError("expected a single vector")
    return x


def log_density_x(spec, x):
    x = _check_row(spec, x)
    return _log_integral(spec.c, x, 1.0 - x)


def log_density_joint(spec, x, x_tilde):
    x = _check_row(spec, x)
    xt = _check_row(spec, x_tilde)
    return _log_integral(spec.c, x + xt, 2.0 - x - xt)


def log_density_joint_rows(spec, xs, xts):
    """Vectorised :func:`log_density_joint` over rows of ``xs`` and ``xts``."""
    xs = check_support(spec, xs)
    xts = check_support(spec, xts)
    ones = xs + xts
    c = np.asarray(spec.c, dtype=float)
    # every row has total degree 2p, so one quadrature rule serves all rows
    lam, logw = _nodes_for_degree(2 * spec.p)
    integrand = np.log(lam)[:, None] * ones.sum(axis=1) + np.log1p(-np.outer(lam, c)) @ (2.0 - ones).T
    return ones @ np.log(c) + logsumexp(logw[:, None] + integrand, axis=0)


def pmf_x(spec, x):
    return float(np.exp(log_density_x(spec, x)))


def pmf_joint(spec, x, x_tilde):
    return float(np.exp(log_density_joint(spec, x, x_tilde)))


def pmf_x_series(spec, x):
    """P(X = x) from the alternating series in the d_j (cancellation-prone for large p)."""
    x = _check_row(spec, x)
    c = np.asarray(spec.c)
    S = np.flatnonzero(x == 1)
    s = len(S)
    d = esp(c, S)
    j = np.arange(len(d))
    return float(np.prod(c[S]) * np.sum((-1.0) ** j * d / (j + s + 1)))


def pmf_joint_series(spec, x, x_tilde):
    x = _check_row(spec, x)
    xt = _check_row(spec, x_tilde)
    c = np.asarray(spec.c)
    S = np.flatnonzero(x == 1)
    T = np.flatnonzero(xt == 1)
    d = esp(c, S)
    e = esp(c, T)
    j = np.arange(len(d))[:, None]
    k = np.arange(len(e))[None, :]
    terms = (-1.0) ** (j + k) * np.outer(d, e) / (j + k + len(S) + len(T) + 1)
    return float(np.prod(c[S]) * np.prod(c[T]) * terms.sum())


def all_points(p):
    """All of {0,1}^p as rows, in lexicographic order."""
    if p > MAX_TABLE_P:
        raise SizeError(f"2^{p} table too large; use sample_knockoff instead")
    k = np.arange(2**p)[:, None]
    return ((k >> np.arange(p - 1, -1, -1)) & 1).astype(np.int64)


def conditional_pmf(spec, x):
    """Exact law of the knockoff given ``X = x``.

    Returns ``(points, probs)`` with ``points`` the 2^p rows of {0,1}^p.
    """
    x = _check_row(spec, x)
    p = spec.p
    pts = all_points(p)
    c = np.asarray(spec.c)
    lam, logw = _nodes_for_degree(2 * p)
    l1 = np.log(np.outer(lam, c))
    l0 = np.log1p(-np.outer(lam, c))
    log_px_given_lam = l1 @ x + l0 @ (1.0 - x)
    # log P(x~ | lam) for every candidate x~ at every node: (2^p, nodes)
    log_pt = pts @ (l1 - l0).T + l0.sum(axis=1)
    log_joint = logsumexp(logw + log_px_given_lam + log_pt, axis=1)
    probs = np.exp(log_joint - log_density_x(spec, x))
    return pts, probs


def sample_x(spec, rng, n=None):
    c = np.asarray(spec.c)
    lam = rng.uniform(size=n)
    u = rng.uniform(size=(() if n is None else (n,)) + c.shape)
    return (u < np.expand_dims(lam, -1) * c).astype(float)


def _log_partial_integral(t, s, z, c, nodes):
    """log int_0^t lam^s prod_i (1 - lam c_i)^z_i dlam for each row; ``z`` is (n, p)."""
    u, logw = nodes
    lam = t[:, None] * u[None, :]  # (n, k)
    tail = np.einsum("ri,rki->rk", z, np.log1p(-lam[:, :, None] * c[None, None, :]))
    with np.errstate(divide="ignore"):
        body = s[:, None] * np.log(lam) + tail
        return np.log(t) + logsumexp(logw[None, :] + body, axis=1)


def sample_lambda_posterior(spec, x, rng):
    """Draw lam | X = x for each row of ``x`` by inverting the exact posterior CDF.

    The posterior density is proportional to ``lam^s prod_{i not in S} (1 - lam c_i)``
    on (0, 1), a polynomial of degree p; its CDF is evaluated exactly and
    inverted to ``BISECT_TOL`` by Newton steps safeguarded with bisection
    (a step leaving the current bracket is replaced by the midpoint).
    """
    x = np.atleast_2d(check_support(spec, x))
    n = x.shape[0]
    c = np.asarray(spec.c)
    s = x.sum(axis=1)
    zeros = 1.0 - x
    nodes = _nodes_for_degree(spec.p)
    log_z = _log_partial_integral(np.ones(n), s, zeros, c, nodes)
    u = rng.uniform(size=n)
    lo = np.zeros(n)
    hi = np.ones(n)
    t = np.full(n, 0.5)
    todo = np.arange(n)
    for _ in range(200):
        tt = t[todo]
        cdf = np.exp(_log_partial_integral(tt, s[todo], zeros[todo], c, nodes) - log_z[todo])
        with np.errstate(divide="ignore"):
            tail = np.sum(zeros[todo] * np.log1p(-np.outer(tt, c)), axis=1)
            log_pdf = s[todo] * np.log(tt) + tail
        pdf = np.exp(log_pdf - log_z[todo])
        below = cdf < u[todo]
        lo[todo] = np.where(below, tt, lo[todo])
        hi[todo] = np.where(below, hi[todo], tt)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (cdf - u[todo]) / pdf
        nxt = tt - step
        bad = ~np.isfinite(nxt) | (nxt <= lo[todo]) | (nxt >= hi[todo])
        nxt = np.where(bad, 0.5 * (lo[todo] + hi[todo]), nxt)
        t[todo] = nxt
        done = (np.abs(nxt - tt) <= BISECT_TOL) | (hi[todo] - lo[todo] <= BISECT_TOL)
        todo = todo[~done]
        if todo.size == 0:
            break
    return t


def sample_knockoff(spec, x, rng, return_lambda=False):
    """Knockoff rows for ``x``: lam | x by CDF inversion, then X~_i ~ Bernoulli(lam c_i)."""
    x = check_support(spec, x)
    single = x.ndim == 1
    xs = np.atleast_2d(x)
    lam = sample_lambda_posterior(spec, xs, rng)
    u = rng.uniform(size=xs.shape)
    xt = (u < lam[:, None] * np.asarray(spec.c)).astype(float)
    if single:
        xt, lam = xt[0], lam[0]
    return (xt, lam) if return_lambda else xt


def sample_latent(spec, rng, n=None):
    return rng.uniform(size=n)


def sample_given_latent(spec, lam, rng):
    lam = np.asarray(lam, dtype=float)
    u = rng.uniform(size=lam.shape + (spec.p,))
    return (u < lam[..., None] * np.asarray(spec.c)).astype(float)


def log_pmf_blocks(spec, blocks):
    """log P(V = v) for k conditionally independent blocks sharing one lam; ``blocks`` is (k, p)."""
    v = np.asarray(blocks, dtype=float)
    ones = v.sum(axis=0)
    return _log_integral(spec.c, ones, v.shape[0] - ones)
