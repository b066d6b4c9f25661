import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats
from scipy.special import gamma

from cik import gauss
from cik.models import GaussMixModel, swap
from cik.stats import energy_test

spec_st = st.builds(
    GaussMixModel,
    st.floats(0.5, 8),
    st.floats(0.2, 10),
    st.lists(st.floats(0.1, 5), min_size=1, max_size=5),
)


def test_density_at_zero():
    spec = GaussMixModel(1, 1, (1.0,))
    h0 = np.exp(gauss.log_density_x(spec, np.zeros(1)))
    assert h0 == pytest.approx(gamma(1.5) / np.sqrt(2 * np.pi), abs=1e-14)
    assert h0 == pytest.approx(0.35355, abs=1e-5)


def test_marginal_normalizes():
    spec = GaussMixModel(1.5, 2.0, (0.7,))
    f = lambda v: np.exp(gauss.log_density_x(spec, np.array([v])))
    assert integrate.quad(f, -np.inf, np.inf)[0] == pytest.approx(1, abs=1e-6)


def test_joint_normalizes():
    spec = GaussMixModel(2.0, 1.0, (1.3,))
    f = lambda y, x: np.exp(gauss.log_density_joint(spec, np.array([x]), np.array([y])))
    val = integrate.dblquad(f, -60, 60, -60, 60, epsabs=1e-9)[0]
    assert val == pytest.approx(1, abs=1e-5)


@given(spec_st, st.data())
def test_generic_student_t_forms(spec, data):
    p = spec.p
    vec = st.lists(st.floats(-10, 10), min_size=p, max_size=p)
    x, xt = np.array(data.draw(vec)), np.array(data.draw(vec))
    c = np.asarray(spec.c)
    h = gauss.student_t_logpdf(x, 2 * spec.a, spec.b / spec.a * c)
    assert gauss.log_density_x(spec, x) == pytest.approx(h, abs=1e-12, rel=1e-12)
    f = gauss.student_t_logpdf(np.r_[x, xt], 2 * spec.a, spec.b / spec.a * np.r_[c, c])
    assert gauss.log_density_joint(spec, x, xt) == pytest.approx(f, abs=1e-12, rel=1e-12)
    prm = gauss.conditional_params(spec, x)
    g = gauss.student_t_logpdf(xt, prm.dof, prm.scales)
    diff = gauss.log_density_joint(spec, x, xt) - gauss.log_density_x(spec, x)
    assert np.exp(diff) == pytest.approx(np.exp(g), rel=1e-10, abs=1e-300)
    for i in range(p):
        s, st_ = swap(x, xt, i)
        assert gauss.log_density_joint(spec, s, st_) == gauss.log_density_joint(spec, x, xt)


def test_conditional_params_example():
    prm = gauss.conditional_params(GaussMixModel(1, 1, (1.0,)), np.zeros(1))
    assert prm.dof == 3
    assert prm.scales[0] == pytest.approx(2 / 3, abs=1e-15)


@given(spec_st, st.floats(0.0, 1.0))
def test_conditional_scale_monotone(spec, t):
    x = np.ones(spec.p)
    assert np.all(gauss.conditional_params(spec, t * x).scales <= gauss.conditional_params(spec, x).scales)


def test_posterior_lambda_law():
    spec = GaussMixModel(2, 3, (1.0, 2.0))
    law = gauss.posterior_lambda(spec, np.array([1.0, 2.0]))
    assert law.a == 3 and law.b == pytest.approx(3 + 0.5 + 1.0)


def test_knockoff_law_at_zero(rng):
    spec = GaussMixModel(1, 1, (1.0,))
    xt = gauss.sample_knockoff(spec, np.zeros((100_000, 1)), rng)[:, 0]
    ks = stats.kstest(xt, stats.t(df=3, scale=np.sqrt(2 / 3)).cdf).statistic
    assert ks < 0.005


def test_knockoff_variance_at_zero(rng):
    # sample variance of a dof-3 Student-t; no fourth moment
    spec = GaussMixModel(1, 1, (1.0,))
    xt = gauss.sample_knockoff(spec, np.zeros((1_000_000, 1)), rng)[:, 0]
    assert abs(xt.var() - 2.0) < 0.05


def test_direct_and_augmented_routes_agree(rng):
    spec = GaussMixModel(2, 1.5, (1.0, 3.0))
    x = np.array([0.7, -2.0])
    a = gauss.sample_knockoff(spec, np.tile(x, (20_000, 1)), rng)
    b = np.array([gauss.sample_knockoff_direct(spec, x, rng) for _ in range(20_000)])
    for i in range(2):
        assert stats.ks_2samp(a[:, i], b[:, i]).pvalue > 0.001


def test_zero_covariance(rng):
    spec = GaussMixModel(6, 10, (1.0, 2.0, 3.0))
    x = gauss.sample_x(spec, rng, 1_000_000)
    xt = gauss.sample_knockoff(spec, x, rng)
    r = np.array([np.corrcoef(x[:, i], xt[:, i])[0, 1] for i in range(3)])
    assert np.all(np.abs(r) < 4e-3)
    assert np.sum(np.abs(r)) < 0.01


def test_knockoff_marginal_equals_data_marginal(rng):
    spec = GaussMixModel(3, 2, (1.0, 0.5))
    x = gauss.sample_x(spec, rng, 100_000)
    xt = gauss.sample_knockoff(spec, x, rng)
    y = gauss.sample_x(spec, rng, 100_000)
    for i in range(2):
        assert stats.ks_2samp(xt[:, i], y[:, i]).pvalue > 0.001


def test_swap_invariance_by_energy(rng):
    spec = GaussMixModel(2, 1, (1.0, 2.0))
    x1 = gauss.sample_x(spec, rng, 1000)
    t1 = gauss.sample_knockoff(spec, x1, rng)
    x2 = gauss.sample_x(spec, rng, 1000)
    t2 = gauss.sample_knockoff(spec, x2, rng)
    s, st_ = swap(x2, t2, 0)
    assert energy_test(np.hstack([x1, t1]), np.hstack([s, st_]), 199, rng).passes(0.01)


def test_large_p_log_density_stable():
    spec = GaussMixModel(6, 10, np.arange(1, 1001.0))
    x = np.linspace(-50, 50, 1000)
    assert np.isfinite(gauss.log_density_joint(spec, x, x))
