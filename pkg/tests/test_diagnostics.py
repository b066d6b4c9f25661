import numpy as np
import pytest

from cik import diagnostics as dg
from cik import models
from cik.models import BinaryModel, GaussMixModel, GibbsMixModel, TernaryModel


def test_sign_flip_is_valid_knockoff_but_not_cik():
    t = dg.sign_flip_table(2)
    for i in range(2):
        assert t.max_abs_diff(t.swapped(i)) < 1e-15
        assert t.cov(i) == pytest.approx(-0.25)
    assert dg.cik_membership_test(t) is False


def test_independent_copy_is_not_refuted():
    t = dg.independent_copy_table(2)
    assert dg.cik_membership_test(t) is True
    assert t.cov(0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize(
    "spec", [BinaryModel((0.3, 0.8)), TernaryModel(2.0, 3.0, (0.2, 0.5, 0.9))]
)
def test_shipped_tables_pass(spec):
    table = models.enumerate_joint(spec)
    assert dg.cik_membership_test(table)
    for i in range(spec.p):
        rep = dg.swap_invariance_test(spec, i)
        assert rep.method == "ExactTable" and rep.passed


def test_swap_mc_gauss(rng):
    spec = GaussMixModel(3.0, 2.0, (1.0, 2.0, 4.0, 8.0))
    rep = dg.swap_invariance_test(spec, 2, n_draws=400, rng=rng)
    assert rep.method == "TwoSampleMC" and rep.passed
    assert rep.to_dict()["pass"] is True


def test_swap_mc_detects_broken_sampler(rng, monkeypatch):
    spec = GaussMixModel(3.0, 2.0, (1.0, 2.0))
    # knockoff with twice the scale breaks exchangeability
    monkeypatch.setattr(models, "sample_knockoff", lambda s, x, g, **k: 2.0 * g.standard_normal(x.shape))
    rep = dg.swap_invariance_test(spec, 0, n_draws=400, rng=rng)
    assert not rep.passed


@pytest.mark.parametrize("spec", [BinaryModel((0.4,)), TernaryModel(1.5, 2.5, (0.3,))])
def test_extendability_exact(spec):
    res = dg.extendability_check(spec, k_blocks=3)
    assert res and all(r["method"] == "ExactTable" and r["pass"] for r in res)
    assert len(res) == 3


def test_extendability_mc(rng):
    spec = GibbsMixModel(4.0, 3.0, 1.0, 2.0, 2)
    res = dg.extendability_check(spec, 3, n_draws=300, rng=rng, n_triples=2)
    assert len(res) == 2 and all(r["pass"] for r in res)


def test_extended_sequence_block_zero_matches_x_law(rng):
    spec = GaussMixModel(6.0, 10.0, (1.0,))
    v = dg.extended_sequence(spec, 3, 20_000, rng)
    assert v.shape == (20_000, 3)
    x = models.sample_x(spec, rng, 20_000)
    from cik.stats import energy_test_1d

    assert energy_test_1d(v[:, 0], x[:, 0], 199, rng).passes(0.01)


def test_optimality_report(rng):
    spec = GaussMixModel(6.0, 10.0, tuple(float(i) for i in range(1, 6)))
    rep = dg.optimality_report(spec, 50_000, rng)
    assert np.all(np.abs(rep.corr) < 0.03)
    assert rep.mac < 0.1
    with pytest.raises(dg.NotApplicableError):
        dg.optimality_report(BinaryModel((0.5,)))


def test_validate_contents(rng):
    out = dg.validate(TernaryModel(2.0, 2.0, (0.5, 0.5)), rng, 200)
    checks = [r["check"] for r in out]
    assert checks.count("swap_invariance") == 2 and "cik_membership" in checks
    assert all(r["pass"] for r in out if "pass" in r)
