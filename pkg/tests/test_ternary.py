import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from cik import ternary
from cik.models import DomainError, SizeError, TernaryModel


def _quad(spec, x, xt=None):
    c = np.asarray(spec.c)
    rows = [np.asarray(x)] + ([] if xt is None else [np.asarray(xt)])

    def f(lam):
        v = stats.beta.pdf(lam, spec.a, spec.b)
        for r in rows:
            v *= np.prod(np.where(r == 2, 1 - lam, np.where(r == 1, lam * c, lam * (1 - c))))
        return v

    return integrate.quad(f, 0, 1, epsabs=1e-14, epsrel=1e-12)[0]


def test_pmf_examples():
    spec = TernaryModel(1, 1, (0.5,))
    assert ternary.pmf_x(spec, [2]) == pytest.approx(0.5, abs=1e-14)
    assert ternary.pmf_x(spec, [1]) == pytest.approx(0.25, abs=1e-14)
    pts, pr = ternary.conditional_pmf(spec, [2])
    assert dict(zip(map(tuple, pts), pr))[(2,)] == pytest.approx(2 / 3, abs=1e-14)


@pytest.mark.parametrize("p", [1, 2, 3, 4])
def test_normalization(p):
    spec = TernaryModel(4, 3, np.linspace(0.2, 0.8, p))
    total = sum(ternary.pmf_x(spec, x) for x in ternary.all_points(p))
    assert abs(total - 1) < 1e-12


ab = st.tuples(st.floats(0.3, 8), st.floats(0.3, 8))
cs = st.lists(st.floats(0.05, 0.95), min_size=1, max_size=6)


@given(ab, cs, st.data())
def test_log_gamma_matches_beta_integral(ab, c, data):
    spec = TernaryModel(ab[0], ab[1], c)
    x = np.array(data.draw(st.lists(st.integers(0, 2), min_size=spec.p, max_size=spec.p)))
    assert ternary.pmf_x(spec, x) == pytest.approx(_quad(spec, x), rel=1e-10, abs=1e-15)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@given(ab, cs.filter(lambda c: len(c) <= 3), st.data())
def test_joint_symmetric_and_matches_integral(ab, c, data):
    spec = TernaryModel(ab[0], ab[1], c)
    t3 = st.lists(st.integers(0, 2), min_size=spec.p, max_size=spec.p)
    x, xt = np.array(data.draw(t3)), np.array(data.draw(t3))
    assert ternary.pmf_joint(spec, x, xt) == ternary.pmf_joint(spec, xt, x)
    assert ternary.pmf_joint(spec, x, xt) == pytest.approx(_quad(spec, x, xt), rel=1e-10, abs=1e-15)


def test_conditional_depends_only_on_m2():
    spec = TernaryModel(4, 3, (0.2, 0.5, 0.7))
    by_m2 = {}
    for x in ternary.all_points(3):
        _, pr = ternary.conditional_pmf(spec, x)
        assert abs(pr.sum() - 1) < 1e-12
        m2 = int(np.sum(x == 2))
        if m2 in by_m2:
            assert np.array_equal(pr, by_m2[m2])
        by_m2[m2] = pr


def test_large_p_no_overflow():
    spec = TernaryModel(2, 5, np.full(3000, 0.4))
    x = np.tile([0, 1, 2], 1000)
    assert np.isfinite(ternary.log_density_x(spec, x))


def test_guards():
    with pytest.raises(SizeError):
        ternary.all_points(13)
    with pytest.raises(DomainError):
        ternary.pmf_x(TernaryModel(1, 1, (0.5,)), [3])


def test_sampler_matches_conditional(rng):
    spec = TernaryModel(4, 3, (0.3, 0.6))
    n = 1_000_000
    for x in ([2, 2], [0, 1], [1, 2]):
        xt = ternary.sample_knockoff(spec, np.tile(x, (n, 1)), rng)
        pts, pr = ternary.conditional_pmf(spec, x)
        code = (xt @ [1, 3]).astype(int)
        freq = np.bincount(code, minlength=9) / n
        exact = pr[np.argsort(pts @ [1, 3])]
        se = np.sqrt(exact * (1 - exact) / n)
        assert np.all(np.abs(freq - exact) < 4 * se + 1e-12)
        assert 0.5 * np.abs(freq - exact).sum() < 0.01


def test_single_two_conditional_frequency(rng):
    xt = ternary.sample_knockoff(TernaryModel(1, 1, (0.5,)), np.full((200_000, 1), 2.0), rng)
    assert abs(np.mean(xt == 2) - 2 / 3) < 4 * np.sqrt(2 / 9 / 200_000)


@given(st.integers(0, 2**32 - 1))
def test_outputs_in_support(seed):
    g = np.random.default_rng(seed)
    spec = TernaryModel(2, 2, (0.2, 0.5, 0.9))
    xt = ternary.sample_knockoff(spec, ternary.sample_x(spec, g, 20), g)
    assert set(np.unique(xt)) <= {0.0, 1.0, 2.0}


def test_block_pmf_sums_to_one():
    spec = TernaryModel(2, 3, (0.3, 0.6))
    total = sum(
        np.exp(ternary.log_pmf_blocks(spec, np.reshape(v, (3, 2))))
        for v in itertools.product((0, 1, 2), repeat=6)
    )
    assert abs(total - 1) < 1e-12
