import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from cik.rng import (
    Beta,
    Gamma,
    InverseGamma,
    Normal,
    ParameterError,
    RandomStream,
    StudentT,
    Uniform,
    sample,
    sample_student_t_vector,
    substream,
)

N = 1_000_000


def test_same_stream_same_draws():
    a = RandomStream(7, 3).generator().standard_normal(100)
    b = RandomStream(7, 3).generator().standard_normal(100)
    assert a.tobytes() == b.tobytes()


def test_distinct_streams_share_no_prefix():
    a = RandomStream(7, 0).generator().integers(0, 2**63, size=64)
    b = RandomStream(7, 1).generator().integers(0, 2**63, size=64)
    assert not np.intersect1d(a, b).size
    assert abs(np.corrcoef(substream(7, 0).random(10_000), substream(7, 1).random(10_000))[0, 1]) < 0.04


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_seed_range(seed):
    with pytest.raises(ParameterError):
        RandomStream(seed)


@given(st.integers(0, 2**64 - 1))
def test_uniform_in_unit_interval(seed):
    v = sample(Uniform(0, 1), substream(seed))
    assert 0.0 <= v < 1.0


@pytest.mark.parametrize(
    "law",
    [Uniform(-1, 3), Normal(0.5, 2.0), Gamma(3.0, 2.0), InverseGamma(6.0, 10.0), Beta(2.0, 5.0)],
)
def test_first_two_moments(law, rng):
    x = sample(law, rng, N)
    se_mean = np.sqrt(law.var() / N)
    assert abs(x.mean() - law.mean()) < 4 * se_mean
    # SE of the sample variance from the fourth central moment
    m4 = np.mean((x - x.mean()) ** 4)
    se_var = np.sqrt((m4 - x.var() ** 2) / N)
    assert abs(x.var() - law.var()) < 4 * se_var


def test_inverse_gamma_mean(rng):
    x = sample(InverseGamma(6, 10), rng, N)
    assert abs(x.mean() - 2.0) < 0.01


def test_student_t_law(rng):
    law = StudentT(3, 2 / 3)
    assert law.var() == pytest.approx(2.0)
    x = sample(law, rng, N)
    assert stats.kstest(x, stats.t(df=3, scale=np.sqrt(2 / 3)).cdf).statistic < 0.005


def test_student_t_sample_variance(rng):
    # dof 3 has no fourth moment, so this band is loose in distribution
    x = sample(StudentT(3, 2 / 3), rng, N)
    assert abs(x.var() - 2.0) < 0.05


@pytest.mark.parametrize(
    "make",
    [
        lambda: Uniform(1, 1),
        lambda: Normal(0, 0),
        lambda: Gamma(-1, 1),
        lambda: InverseGamma(1, 0),
        lambda: Beta(0, 1),
        lambda: StudentT(0, 1),
        lambda: Normal(np.nan, 1),
    ],
)
def test_invalid_parameters(make):
    with pytest.raises(ParameterError):
        make()


def test_vector_t_uncorrelated(rng):
    a, b = 6.0, 10.0
    c = np.arange(1, 4.0)
    z = sample_student_t_vector(2 * a, (b / a) * c, rng, size=200_000)
    r = np.corrcoef(z.T)
    se = 1 / np.sqrt(len(z))
    assert np.all(np.abs(r[np.triu_indices(3, 1)]) < 3 * se * 1.5)
    # marginal variance scale * k / (k - 2)
    np.testing.assert_allclose(z.var(axis=0), (b / a) * c * 12 / 10, rtol=0.03)


def test_vector_t_gaussian_limit(rng):
    z = sample_student_t_vector(1e6, np.ones(1), rng, size=N)
    assert abs(z.var() - 1.0) < 0.01


def test_vector_t_matches_scalar(rng):
    z = sample_student_t_vector(3, np.array([2 / 3]), rng, size=100_000)[:, 0]
    s = sample(StudentT(3, 2 / 3), rng, 100_000)
    assert stats.ks_2samp(z, s).statistic < 0.01


def test_vector_t_invalid():
    with pytest.raises(ParameterError):
        sample_student_t_vector(0, np.ones(2), np.random.default_rng(0))
    with pytest.raises(ParameterError):
        sample_student_t_vector(3, np.array([1.0, -1.0]), np.random.default_rng(0))
