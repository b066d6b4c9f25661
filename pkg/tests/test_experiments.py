import numpy as np
import pytest

from cik import experiments as ex
from cik import io
from cik.experiments import ExperimentConfig
from cik.models import GaussMixModel


def small(**kw):
    base = dict(
        n=60, p=12, m=2, n_signals=4, amplitudes=(0.0, 2.0, 6.0), replicates=3, seed=11,
        model=GaussMixModel(6.0, 10.0, tuple(float(i) for i in range(1, 13))),
    )
    base.update(kw)
    return ExperimentConfig(**base)


def csv_bytes(report, path):
    io.write_report(report, path)
    return path.read_bytes()


def test_rerun_and_threads_are_byte_identical(tmp_path):
    cfg = small()
    a = csv_bytes(ex.run_simulation(cfg, threads=1), tmp_path / "a.csv")
    b = csv_bytes(ex.run_simulation(cfg, threads=1), tmp_path / "b.csv")
    c = csv_bytes(ex.run_simulation(cfg, threads=3), tmp_path / "c.csv")
    assert a == b == c


def test_report_layout():
    cfg = small()
    rep = ex.run_simulation(cfg)
    assert rep.complete
    assert len(rep.rows) == len(cfg.amplitudes) * cfg.replicates * cfg.m
    assert [r["u"] for r in rep.rows[:: cfg.replicates * cfg.m]] == list(cfg.amplitudes)
    assert [r["u"] for r in rep.records] == list(cfg.amplitudes)


def test_zero_amplitude_power_is_undefined():
    rep = ex.run_simulation(small(amplitudes=(0.0,), replicates=2))
    assert all(np.isnan(r["power"]) for r in rep.rows)
    assert rep.records[0]["mean_power"] == 0.0


def test_summarize_hand_computed():
    rows = [
        {"u": 1.0, "replicate": 0, "knockoff_id": 0, "power": 0.5, "fdr": 0.0},
        {"u": 1.0, "replicate": 0, "knockoff_id": 1, "power": 1.0, "fdr": 0.2},
        {"u": 1.0, "replicate": 1, "knockoff_id": 0, "power": 0.25, "fdr": 0.1},
        {"u": 1.0, "replicate": 1, "knockoff_id": 1, "power": 0.25, "fdr": 0.1},
    ]
    (rec,) = ex.summarize(rows, (1.0,))
    assert rec["mean_power"] == pytest.approx(0.5)
    assert rec["mean_fdr"] == pytest.approx(0.1)
    assert rec["se_power"] == pytest.approx(np.std([0.75, 0.25], ddof=1) / np.sqrt(2))
    assert rec["se_fdr"] == pytest.approx(0.0)


def test_run_on_data_reproduces_replicate(tmp_path):
    cfg = small(m=1, amplitudes=(6.0,))
    support, x, noise, _ = ex.simulate_data(cfg, 1)
    y, beta = ex.response(cfg, support, x, noise, 6.0)
    sim = ex.run_simulation(cfg)
    row = [r for r in sim.rows if r["replicate"] == 1][0]
    io.write_matrix(tmp_path / "x.csv", x)
    io.write_matrix(tmp_path / "y.csv", y[:, None])
    sel = ex.run_on_data(tmp_path / "x.csv", tmp_path / "y.csv", cfg.model, cfg.q_target, 1,
                         cfg.seed, keys=(1,))
    from cik.filter import fdr_power

    fdp, power = fdr_power(sel.modal_set, np.flatnonzero(beta))
    assert (fdp, power) == (row["fdr"], row["power"])
    assert sel.frequency.sum() == len(sel.modal_set)


def test_run_on_data_shape_errors(rng):
    model = GaussMixModel(6.0, 10.0, (1.0, 2.0))
    with pytest.raises(ValueError):
        ex.run_on_data(rng.standard_normal((10, 3)), np.zeros(10), model)
    with pytest.raises(ValueError):
        ex.run_on_data(rng.standard_normal((10, 2)), np.zeros(9), model)


def test_config_validation():
    with pytest.raises(ValueError):
        small(q_target=1.0)
    with pytest.raises(ValueError):
        small(p=5)
    with pytest.raises(ValueError):
        small(amplitudes=())


def test_threads_resolution(monkeypatch):
    monkeypatch.setenv("CIK_THREADS", "3")
    assert ex.resolve_threads() == 3
    assert ex.resolve_threads(2) == 2
    monkeypatch.delenv("CIK_THREADS")
    assert ex.resolve_threads() == 1
    with pytest.raises(ValueError):
        ex.resolve_threads(0)


def test_interrupt_returns_partial(monkeypatch):
    calls = {"n": 0}
    real = ex._replicate

    def flaky(cfg, r):
        calls["n"] += 1
        if r == 1:
            raise KeyboardInterrupt
        return real(cfg, r)

    monkeypatch.setattr(ex, "_replicate", flaky)
    rep = ex.run_simulation(small())
    assert not rep.complete
    assert {r["replicate"] for r in rep.rows} == {0}
