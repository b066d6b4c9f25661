"""Lasso by cyclic coordinate descent with a duality-gap stopping rule.

Minimises (1/2n) ||y - X beta||^2 + reg ||beta||_1. Columns are centred and
scaled to unit variance before fitting and coefficients are mapped back to
the original scale on output. The solver works on the Gram matrix, which is
cheap for the n x 2p knockoff designs used here.

Ties between identical columns go to the lower column index: coordinates are
visited in index order, so an earlier duplicate absorbs the signal and later
copies see a zero partial residual.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DEFAULT_TOL = 1e-8
MAX_SWEEPS = 100_000


class ConvergenceError(RuntimeError):
    """Coordinate descent hit the sweep limit; ``partial`` holds the last iterate."""

    def __init__(self, msg, partial):
        super().__init__(msg)
        self.partial = partial


class InputError(ValueError):
    pass


@njit(cache=True, nogil=True)
def _gap(G, cvec, yy, lam, beta, grad):
    # grad = X^T r / n; all quantities scaled by 1/n
    bc = 0.0
    bg = 0.0
    l1 = 0.0
    gmax = 0.0
    for j in range(beta.shape[0]):
        bc += beta[j] * cvec[j]
        bg += beta[j] * grad[j]
        l1 += abs(beta[j])
        if abs(grad[j]) > gmax:
            gmax = abs(grad[j])
    bGb = bc - bg
    rr = yy - 2.0 * bc + bGb
    if rr < 0.0:
        rr = 0.0
    ry = yy - bc
    primal = 0.5 * rr + lam * l1
    s = 1.0
    if gmax > lam:
        s = lam / gmax
    dual = s * ry - 0.5 * s * s * rr
    return primal - dual


@njit(cache=True, nogil=True)
def _sweep(G, lam, beta, grad, idx):
    max_change = 0.0
    for k in range(idx.shape[0]):
        j = idx[k]
        gjj = G[j, j]
        if gjj <= 0.0:
            continue
        z = grad[j] + gjj * beta[j]
        if z > lam:
            new = (z - lam) / gjj
        elif z < -lam:
            new = (z + lam) / gjj
        else:
            new = 0.0
        delta = new - beta[j]
        if delta != 0.0:
            for i in range(grad.shape[0]):
                grad[i] -= G[i, j] * delta
            beta[j] = new
            if abs(delta) > max_change:
                max_change = abs(delta)
    return max_change


@njit(cache=True, nogil=True)
def _support_target(G, cvec, lam, active, signs, cur):
    """Where to move the support coefficients with signs held fixed.

    Returns ``(target, bounded)``. For a nonsingular block the target is the
    KKT solution. For a singular block whose right-hand side lies in its
    range, it is the solution closest to ``cur``; otherwise the fixed-sign
    objective decreases without bound along a null direction and
    ``cur + direction`` is returned with ``bounded`` False.
    """
    k = active.shape[0]
    Gaa = np.empty((k, k))
    rhs = np.empty(k)
    for a in range(k):
        rhs[a] = cvec[active[a]] - lam * signs[a]
        for b in range(k):
            Gaa[a, b] = G[active[a], active[b]]
    # fast path: Cholesky with a conditioning check on its diagonal
    L = np.zeros((k, k))
    ok = True
    for a in range(k):
        acc = Gaa[a, a]
        for q in range(a):
            acc -= L[a, q] * L[a, q]
        if acc <= 1e-10 * Gaa[a, a]:
            ok = False
            break
        L[a, a] = np.sqrt(acc)
        for r in range(a + 1, k):
            acc2 = Gaa[r, a]
            for q in range(a):
                acc2 -= L[r, q] * L[a, q]
            L[r, a] = acc2 / L[a, a]
    if ok:
        z = np.empty(k)
        for a in range(k):
            acc = rhs[a]
            for q in range(a):
                acc -= L[a, q] * z[q]
            z[a] = acc / L[a, a]
        out = np.empty(k)
        for a in range(k - 1, -1, -1):
            acc = z[a]
            for q in range(a + 1, k):
                acc -= L[q, a] * out[q]
            out[a] = acc / L[a, a]
        return out, True
    w, V = np.linalg.eigh(Gaa)
    tol = 1e-10 * max(w[k - 1], 1e-300)
    proj = V.T @ rhs
    coef = V.T @ cur
    null_norm = 0.0
    rhs_norm = 0.0
    for a in range(k):
        rhs_norm += proj[a] * proj[a]
        if w[a] <= tol:
            null_norm += proj[a] * proj[a]
    if null_norm <= 1e-20 * max(rhs_norm, 1e-300):
        for a in range(k):
            if w[a] > tol:
                coef[a] = proj[a] / w[a]
        return V @ coef, True
    step = np.zeros(k)
    for a in range(k):
        if w[a] <= tol:
            step[a] = proj[a]
    return cur + V @ step, False


@njit(cache=True, nogil=True)
def _polish(G, cvec, lam, beta, max_iter):
    """Primal active-set refinement of a coordinate-descent iterate.

    Keeps a sign-consistent iterate and moves it toward the fixed-sign
    optimum on its support, stopping at the first sign change and dropping
    that coordinate; once the optimum is reached, the worst violator of the
    inactive KKT condition joins. Returns the final iterate.
    """
    m = beta.shape[0]
    b = beta.copy()
    in_set = b != 0.0
    signs_all = np.sign(b)
    fresh = -1
    for _ in range(max_iter):
        active = np.flatnonzero(in_set)
        k = active.shape[0]
        if k > 0:
            signs = np.empty(k)
            cur = np.empty(k)
            for a in range(k):
                signs[a] = signs_all[active[a]]
                cur[a] = b[active[a]]
            target, bounded = _support_target(G, cvec, lam, active, signs, cur)
            if not np.all(np.isfinite(target)):
                return b
            t = 1.0 if bounded else np.inf
            hit = -1
            for a in range(k):
                if (target[a] - cur[a]) * signs[a] < 0.0:
                    ta = cur[a] / (cur[a] - target[a])
                    if ta < t:
                        t = ta
                        hit = a
            if not np.isfinite(t):
                return b
            if hit >= 0 and active[hit] == fresh and t <= 0.0:
                return b
            for a in range(k):
                b[active[a]] = cur[a] + t * (target[a] - cur[a])
            if hit >= 0:
                b[active[hit]] = 0.0
                in_set[active[hit]] = False
                continue
            if not bounded:
                continue
        grad = cvec - G @ b
        worst = -1
        viol = lam * (1.0 + 1e-12)
        for j in range(m):
            if not in_set[j] and abs(grad[j]) > viol:
                viol = abs(grad[j])
                worst = j
        if worst < 0:
            return b
        in_set[worst] = True
        signs_all[worst] = np.sign(grad[worst])
        fresh = worst
    return b


@njit(cache=True, nogil=True)
def _cd(G, cvec, yy, lam, beta, tol, max_sweeps):
    """Coordinate descent from ``beta`` (modified in place); returns (sweeps, gap)."""
    m = beta.shape[0]
    full = np.arange(m)
    thresh = tol * max(0.5 * yy, 1e-300)
    sweeps = 0
    rounds = 0
    while True:
        # exact gradient each round so the reported gap carries no drift
        grad = cvec - G @ beta
        gap = _gap(G, cvec, yy, lam, beta, grad)
        if gap <= thresh or sweeps >= max_sweeps:
            return sweeps, gap
        if rounds > 0:
            cand = _polish(G, cvec, lam, beta, 50)
            cgrad = cvec - G @ cand
            cgap = _gap(G, cvec, yy, lam, cand, cgrad)
            if cgap < gap:
                beta[:] = cand
                grad = cgrad
                gap = cgap
                if gap <= thresh:
                    return sweeps, gap
        rounds += 1
        _sweep(G, lam, beta, grad, full)
        sweeps += 1
        # cycle on the active set until it settles, then re-check all coordinates
        active = np.flatnonzero(beta != 0.0)
        inner = 0
        while inner < 25 and sweeps < max_sweeps:
            ch = _sweep(G, lam, beta, grad, active)
            sweeps += 1
            inner += 1
            if ch < 1e-13:
                break
            if inner % 10 == 0 and _gap(G, cvec, yy, lam, beta, grad) <= 0.5 * thresh:
                break


def _check_finite(X, y):
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise InputError("non-finite values in design or response")


class Standardized:
    """Centred, unit-variance view of a design together with its Gram statistics."""

    def __init__(self, X, y, standardize=True, fit_intercept=True):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        _check_finite(X, y)
        n = X.shape[0]
        self.x_mean = X.mean(axis=0) if fit_intercept else np.zeros(X.shape[1])
        self.y_mean = float(y.mean()) if fit_intercept else 0.0
        Xc = X - self.x_mean
        if standardize:
            sd = np.sqrt(np.mean(Xc * Xc, axis=0))
            sd[sd == 0] = 1.0
        else:
            sd = np.ones(X.shape[1])
        self.x_sd = sd
        Xs = Xc / sd
        yc = y - self.y_mean
        self.n = n
        self.G = np.ascontiguousarray(Xs.T @ Xs / n)
        self.cvec = Xs.T @ yc / n
        self.yy = float(yc @ yc / n)
        # rank bound of the centred design
        self.max_support = min(X.shape[1], n - 1 if fit_intercept else n)

    @property
    def lambda_max(self):
        return float(np.max(np.abs(self.cvec)))

    def to_original(self, beta_std):
        return beta_std / self.x_sd

    def intercept(self, beta_orig):
        return self.y_mean - float(self.x_mean @ beta_orig)


def solve(st, reg, beta0=None, tol=DEFAULT_TOL, max_sweeps=MAX_SWEEPS):
    """Standardized-scale lasso solution for a :class:`Standardized` problem."""
    if reg < 0:
        raise InputError("reg must be >= 0")
    m = st.G.shape[0]
    if reg == 0:
        # the duality gap carries no information without a penalty; use the
        # minimum-norm least-squares solution of the normal equations
        return np.linalg.lstsq(st.G, st.cvec, rcond=None)[0]
    beta = np.zeros(m) if beta0 is None else np.array(beta0, dtype=float)
    sweeps, gap = _cd(st.G, st.cvec, st.yy, float(reg), beta, tol, max_sweeps)
    if gap > tol * max(0.5 * st.yy, 1e-300):
        raise ConvergenceError(
            f"no convergence after {sweeps} sweeps (duality gap {gap:.3g})", beta
        )
    return beta


def lasso_fit(design, response, reg, standardize=True, fit_intercept=True, tol=DEFAULT_TOL,
              max_sweeps=MAX_SWEEPS):
    """Lasso coefficients on the original scale of ``design``."""
    st = Standardized(design, response, standardize, fit_intercept)
    try:
        beta = solve(st, reg, tol=tol, max_sweeps=max_sweeps)
    except ConvergenceError as e:
        e.partial = st.to_original(e.partial)
        raise
    return st.to_original(beta)


def lambda_grid(lam_max, n_lambda=50, ratio=1e-3):
    return lam_max * np.logspace(0.0, np.log10(ratio), n_lambda)


def lasso_path(st, lambdas, tol=DEFAULT_TOL, max_sweeps=MAX_SWEEPS, saturation=0.999):
    """Warm-started solutions (standardized scale), one row per entry of ``lambdas``.

    As in glmnet, the path stops once the fit explains a fraction
    ``saturation`` of the response variance or the support reaches the rank bound; the
    remaining rows are NaN. Pass ``saturation=None`` to fit every value.
    """
    out = np.full((len(lambdas), st.G.shape[0]), np.nan)
    beta = np.zeros(st.G.shape[0])
    for k, lam in enumerate(lambdas):
        beta = solve(st, lam, beta, tol=tol, max_sweeps=max_sweeps)
        out[k] = beta
        if saturation is not None:
            rr = st.yy - 2 * beta @ st.cvec + beta @ st.G @ beta
            if rr <= (1.0 - saturation) * st.yy or np.count_nonzero(beta) >= st.max_support:
                break
    return out


def cv_lambda(X, y, lambdas, folds, rng):
    """Index into ``lambdas`` minimising k-fold mean squared prediction error.

    Values beyond the point where any fold's path stopped are not eligible.
    """
    n = X.shape[0]
    fold_of = rng.permutation(n) % folds
    err = np.zeros(len(lambdas))
    for f in range(folds):
        test = fold_of == f
        st = Standardized(X[~test], y[~test])
        path = lasso_path(st, lambdas)
        coefs = path / st.x_sd
        icpt = st.y_mean - coefs @ st.x_mean
        pred = X[test] @ coefs.T + icpt
        err += np.sum((y[test][:, None] - pred) ** 2, axis=0)
    err = np.where(np.isnan(err), np.inf, err)
    return int(np.argmin(err / n))
