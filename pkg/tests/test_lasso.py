import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cik import lasso
from cik.lasso import ConvergenceError, InputError, Standardized


def kkt_violation(s, beta, lam):
    g = s.cvec - s.G @ beta
    on = beta != 0
    v_on = np.abs(g[on] - lam * np.sign(beta[on]))
    v_off = np.maximum(np.abs(g[~on]) - lam, 0.0)
    return max(v_on.max(initial=0.0), v_off.max(initial=0.0))


def test_zero_penalty_is_least_squares(rng):
    X = rng.standard_normal((80, 5))
    y = X @ np.arange(1.0, 6.0) + rng.standard_normal(80)
    b = lasso.lasso_fit(X, y, 0.0)
    Xc = np.c_[np.ones(80), X]
    ref = np.linalg.lstsq(Xc, y, rcond=None)[0][1:]
    np.testing.assert_allclose(b, ref, atol=1e-6)


def test_orthogonal_design_soft_thresholds(rng):
    n = 64
    Q, _ = np.linalg.qr(rng.standard_normal((n, 4)))
    X = Q * np.sqrt(n)
    y = X @ np.array([2.0, -1.0, 0.05, 0.0])
    s = Standardized(X, y, standardize=False, fit_intercept=False)
    lam = 0.3
    b = lasso.solve(s, lam)
    z = s.cvec
    np.testing.assert_allclose(b, np.sign(z) * np.maximum(np.abs(z) - lam, 0), atol=1e-10)


def test_lambda_max_gives_null_solution(rng):
    X = rng.standard_normal((50, 8))
    y = rng.standard_normal(50)
    s = Standardized(X, y)
    assert not np.any(lasso.solve(s, s.lambda_max))
    assert np.any(lasso.solve(s, 0.9 * s.lambda_max))


@settings(max_examples=25)
@given(st.integers(10, 60), st.integers(1, 80), st.floats(0.01, 0.9), st.integers(0, 2**32 - 1))
def test_kkt_conditions(n, m, frac, seed):
    g = np.random.default_rng(seed)
    X = g.standard_normal((n, m))
    y = X[:, 0] + g.standard_normal(n)
    s = Standardized(X, y)
    lam = frac * s.lambda_max
    b = lasso.solve(s, lam)
    assert kkt_violation(s, b, lam) <= 1e-6


def test_rank_deficient_duplicate_columns(rng):
    x = rng.standard_normal((40, 1))
    X = np.hstack([x, x, rng.standard_normal((40, 3))])
    y = 2 * x[:, 0] + 0.1 * rng.standard_normal(40)
    s = Standardized(X, y)
    lam = 0.05 * s.lambda_max
    b = lasso.solve(s, lam)
    assert kkt_violation(s, b, lam) <= 1e-6
    assert b[0] + b[1] == pytest.approx(lasso.solve(Standardized(X[:, [0, 2, 3, 4]], y), lam)[0], abs=1e-5)


def test_more_columns_than_rows(rng):
    X = rng.standard_normal((30, 90))
    y = X[:, :3].sum(axis=1) + rng.standard_normal(30)
    s = Standardized(X, y)
    path = lasso.lasso_path(s, lasso.lambda_grid(s.lambda_max, 40))
    done = path[~np.isnan(path[:, 0])]
    assert np.count_nonzero(done[-1]) <= s.max_support


def test_convergence_error_carries_iterate(rng):
    X = rng.standard_normal((50, 40))
    y = rng.standard_normal(50)
    s = Standardized(X, y)
    with pytest.raises(ConvergenceError) as e:
        lasso.solve(s, 0.01 * s.lambda_max, tol=1e-16, max_sweeps=1)
    assert e.value.partial.shape == (40,)


def test_input_errors(rng):
    X = rng.standard_normal((10, 3))
    with pytest.raises(InputError):
        lasso.lasso_fit(X, np.r_[np.nan, np.zeros(9)], 0.1)
    with pytest.raises(InputError):
        lasso.solve(Standardized(X, np.zeros(10)), -1.0)


def test_path_is_warm_started_and_monotone_in_fit(rng):
    X = rng.standard_normal((100, 10))
    y = X[:, :2] @ [1.0, -1.0] + rng.standard_normal(100)
    s = Standardized(X, y)
    lams = lasso.lambda_grid(s.lambda_max, 20, 0.01)
    path = lasso.lasso_path(s, lams, saturation=None)
    rss = [s.yy - 2 * b @ s.cvec + b @ s.G @ b for b in path]
    assert np.all(np.diff(rss) <= 1e-10)


def test_cv_lambda_deterministic(rng):
    X = rng.standard_normal((60, 6))
    y = X[:, 0] + rng.standard_normal(60)
    lams = lasso.lambda_grid(Standardized(X, y).lambda_max, 15)
    a = lasso.cv_lambda(X, y, lams, 5, np.random.default_rng(3))
    b = lasso.cv_lambda(X, y, lams, 5, np.random.default_rng(3))
    assert a == b and 0 <= a < 15
