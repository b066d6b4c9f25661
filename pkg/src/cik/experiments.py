"""Simulation harness for knockoff selection with CIK knockoffs, and the same pipeline on given data.

Random streams are keyed by position so results do not depend on thread
count or scheduling: replicate ``r`` draws its signal set, design and noise
from ``substream(seed, r, 0)``, knockoff copy ``k`` from
``substream(seed, r, 1, k)`` and the cross-validation folds of that copy
from ``substream(seed, r, 2, k)``. All amplitudes reuse the same replicate
draws, so amplitude comparisons are paired.
"""

from __future__ import annotations

import os
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from cik import filter as kfilter
from cik import models
from cik.io import SchemaError, check_fields, read_matrix, read_vector
from cik.models import GaussMixModel
from cik.rng import substream

MAX_SEED = 2**64


def resolve_threads(threads=None):
    """Explicit value, else the CIK_THREADS environment variable, else 1."""
    if threads is None:
        env = os.environ.get("CIK_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("threads must be >= 1")
    return threads


def _default_model():
    return GaussMixModel(6.0, 10.0, tuple(float(i) for i in range(1, 201)))


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 200
    p: int = 200
    m: int = 5
    n_signals: int = 20
    amplitudes: tuple = (0.5, 1.0, 3.0)
    q_target: float = 0.1
    model: object = field(default_factory=_default_model)
    seed: int = 0
    replicates: int = 30

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", tuple(float(u) for u in self.amplitudes))
        for k in ("n", "p", "m", "n_signals", "replicates"):
            if int(getattr(self, k)) < 1:
                raise ValueError(f"{k} must be a positive integer")
        if self.n_signals > self.p:
            raise ValueError("n_signals must not exceed p")
        if not self.amplitudes:
            raise ValueError("amplitudes must be nonempty")
        if any(u < 0 for u in self.amplitudes):
            raise ValueError("amplitudes must be >= 0")
        if not 0 < self.q_target < 1:
            raise ValueError("q_target must lie in (0, 1)")
        if not 0 <= self.seed < MAX_SEED:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.model.p != self.p:
            raise ValueError(f"model.p = {self.model.p} does not match p = {self.p}")

    def to_dict(self):
        return {
            "n": self.n,
            "p": self.p,
            "m": self.m,
            "n_signals": self.n_signals,
            "amplitudes": list(self.amplitudes),
            "q_target": self.q_target,
            "model": models.model_to_dict(self.model),
            "seed": self.seed,
            "replicates": self.replicates,
        }

    @classmethod
    def from_dict(cls, d, path="$"):
        ints = ("n", "p", "m", "n_signals", "seed", "replicates")
        check_fields(d, (), ints + ("amplitudes", "q_target", "model"), path)
        for k in ints:
            if k in d and (not isinstance(d[k], int) or isinstance(d[k], bool)):
                raise SchemaError(f"{path}.{k}: expected an integer")
        kw = {k: v for k, v in d.items() if k != "model"}
        if "amplitudes" in kw and not isinstance(kw["amplitudes"], list):
            raise SchemaError(f"{path}.amplitudes: expected a list")
        if "model" in d:
            kw["model"] = models.model_from_dict(d["model"], path=f"{path}.model")
        try:
            return cls(**kw)
        except (TypeError, ValueError) as e:
            raise SchemaError(f"{path}: {e}") from e


@dataclass
class ExperimentReport:
    """``rows`` hold one record per (u, replicate, knockoff); ``records`` one summary per u.

    ``runtime`` (seconds per amplitude) is excluded from equality since it
    is the only nondeterministic field.
    """

    config: ExperimentConfig
    rows: list
    records: list
    complete: bool = True
    runtime: dict = field(default_factory=dict, compare=False)


def _true_support(beta):
    return np.flatnonzero(beta)


def simulate_data(config, replicate):
    """Signal set, design, noise and the m knockoff matrices of one replicate."""
    rng = substream(config.seed, replicate, 0)
    support = np.sort(rng.choice(config.p, size=config.n_signals, replace=False))
    x = models.sample_x(config.model, rng, config.n)
    noise = rng.standard_normal(config.n)
    knockoffs = [
        models.sample_knockoff(config.model, x, substream(config.seed, replicate, 1, k))
        for k in range(config.m)
    ]
    return support, x, noise, knockoffs


def response(config, support, x, noise, u):
    beta = np.zeros(config.p)
    beta[support] = u / np.sqrt(config.n)
    return x @ beta + noise, beta


def _replicate(config, r):
    support, x, noise, knockoffs = simulate_data(config, r)
    out = []
    for u in config.amplitudes:
        y, beta = response(config, support, x, noise, u)
        true = _true_support(beta)
        for k, xk in enumerate(knockoffs):
            res = kfilter.run_filter(
                kfilter.RegressionData(x, y, xk), config.q_target,
                rng=substream(config.seed, r, 2, k),
            )
            fdp = kfilter.fdp(res.selected, true)
            power = kfilter.fdr_power(res.selected, true)[1] if len(true) else float("nan")
            out.append({"u": u, "replicate": r, "knockoff_id": k, "power": power, "fdr": fdp})
    return out


def summarize(rows, amplitudes):
    """Average over knockoff copies within a replicate, then over replicates."""
    records = []
    for u in amplitudes:
        per_rep = {}
        for row in rows:
            if row["u"] == u:
                per_rep.setdefault(row["replicate"], []).append((row["power"], row["fdr"]))
        if not per_rep:
            continue
        reps = sorted(per_rep)
        fdr = np.array([np.mean([v[1] for v in per_rep[r]]) for r in reps])
        pw = [[v[0] for v in per_rep[r] if np.isfinite(v[0])] for r in reps]
        power = np.array([np.mean(v) for v in pw if v])
        rec = {"u": u, "mean_fdr": float(fdr.mean()), "se_fdr": _se(fdr)}
        if len(power):
            rec.update(mean_power=float(power.mean()), se_power=_se(power))
        else:
            rec.update(mean_power=0.0, se_power=0.0)
        records.append(rec)
    return records


def _se(v):
    return float(np.std(v, ddof=1) / np.sqrt(len(v))) if len(v) > 1 else 0.0


def run_simulation(config, threads=None, progress=None):
    """Run every replicate and amplitude; returns an :class:`ExperimentReport`.

    A KeyboardInterrupt stops the run and returns the completed replicates
    with ``complete=False``.
    """
    threads = resolve_threads(threads)
    t0 = time.perf_counter()
    done = []
    complete = True
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        if pool is None:
            for r in range(config.replicates):
                done.append(_replicate(config, r))
                if progress:
                    progress(r + 1, config.replicates)
        else:
            futures = [pool.submit(_replicate, config, r) for r in range(config.replicates)]
            for r, fut in enumerate(futures):
                done.append(fut.result())
                if progress:
                    progress(r + 1, config.replicates)
    except KeyboardInterrupt:
        complete = False
        if pool is not None:
            pool.shutdown(wait=False, cancel_futures=True)
            pool = None
    finally:
        if pool is not None:
            pool.shutdown()
    rows = [row for rep in done for row in rep]
    # replicate-major from the workers; report amplitude-major
    order = {u: i for i, u in enumerate(config.amplitudes)}
    rows.sort(key=lambda row: (order[row["u"]], row["replicate"], row["knockoff_id"]))
    elapsed = time.perf_counter() - t0
    runtime = {u: elapsed / len(config.amplitudes) for u in config.amplitudes}
    return ExperimentReport(config, rows, summarize(rows, config.amplitudes), complete, runtime)


@dataclass
class SelectionReport:
    frequency: np.ndarray
    modal_set: tuple
    selections: list
    q_target: float

    def to_dict(self):
        return {
            "frequency": [float(f) for f in self.frequency],
            "modal_set": list(self.modal_set),
            "selections": [list(s) for s in self.selections],
            "q": self.q_target,
        }


def _load(obj, vector=False):
    if isinstance(obj, (str, Path)):
        return read_vector(obj) if vector else read_matrix(obj)
    return np.asarray(obj, dtype=float)


def run_on_data(x, y, model, q=0.1, m=1, seed=0, keys=(), threads=None):
    """Filter with ``m`` independent CIK knockoff matrices of the observed ``x``.

    ``x`` and ``y`` are arrays or CSV paths. Copy ``k`` uses streams
    ``substream(seed, *keys, 1, k)`` and ``substream(seed, *keys, 2, k)``,
    so ``keys=(r,)`` with m=1 reproduces replicate ``r`` of
    :func:`run_simulation`. The latent hyperparameters come from ``model``
    and are not fitted to the data.
    """
    x = _load(x)
    y = _load(y, vector=True)
    if x.ndim != 2 or x.shape[1] != model.p:
        raise ValueError(f"x has shape {x.shape}, model expects {model.p} columns")
    if len(y) != x.shape[0]:
        raise ValueError(f"y has {len(y)} entries, x has {x.shape[0]} rows")

    def one(k):
        xk = models.sample_knockoff(model, x, substream(seed, *keys, 1, k))
        res = kfilter.run_filter(kfilter.RegressionData(x, y, xk), q, rng=substream(seed, *keys, 2, k))
        return tuple(int(i) for i in res.selected)

    threads = resolve_threads(threads)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sels = list(pool.map(one, range(m)))
    else:
        sels = [one(k) for k in range(m)]
    freq = np.zeros(model.p)
    for s in sels:
        freq[list(s)] += 1
    counts = Counter(sels)
    top = max(counts.values())
    modal = next(s for s in sels if counts[s] == top)
    return SelectionReport(freq / m, modal, sels, q)
