"""Seedable random streams and the scalar laws used by the samplers.

Every sampler in the package takes a ``numpy.random.Generator``. A
:class:`RandomStream` names a reproducible generator by ``(seed, stream_id)``;
substreams are derived through ``SeedSequence`` spawn keys so replicates can be
drawn independently without coordinating state.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np


class ParameterError(ValueError):
    """Invalid distribution or model parameter."""


@dataclass(frozen=True)
class RandomStream:
    seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= int(v) < 2**64):
                raise ParameterError(f"{name} must be a 64-bit unsigned integer, got {v}")

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Generator for the substream addressed by ``keys`` under ``seed``."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(ss))


def _positive(**kw):
    for name, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise ParameterError(f"{name} must be finite and > 0, got {v}")


@dataclass(frozen=True)
class Uniform:
    lo: float = 0.0
    hi: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi) and self.lo < self.hi):
            raise ParameterError(f"need finite lo < hi, got ({self.lo}, {self.hi})")

    def sample(self, rng, size=None):
        return rng.uniform(self.lo, self.hi, size)

    def mean(self):
        return 0.5 * (self.lo + self.hi)

    def var(self):
        return (self.hi - self.lo) ** 2 / 12.0


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    variance: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ParameterError("mean must be finite")
        _positive(variance=self.variance)

    def sample(self, rng, size=None):
        return self.mu + np.sqrt(self.variance) * rng.standard_normal(size)

    def mean(self):
        return self.mu

    def var(self):
        return self.variance


@dataclass(frozen=True)
class Gamma:
    """Gamma law in the (shape, rate) parametrisation."""

    shape: float
    rate: float = 1.0

    def __post_init__(self):
        _positive(shape=self.shape, rate=self.rate)

    def sample(self, rng, size=None):
        return rng.gamma(self.shape, 1.0 / self.rate, size)

    def mean(self):
        return self.shape / self.rate

    def var(self):
        return self.shape / self.rate**2


@dataclass(frozen=True)
class InverseGamma:
    """Density ``b^a / Gamma(a) * x^(-a-1) * exp(-b/x)`` on ``x > 0``."""

    a: float
    b: float

    def __post_init__(self):
        _positive(a=self.a, b=self.b)

    def sample(self, rng, size=None):
        # 1/Gamma(shape=a, rate=b)
        return 1.0 / rng.gamma(self.a, 1.0 / self.b, size)

    def mean(self):
        return self.b / (self.a - 1.0) if self.a > 1 else np.inf

    def var(self):
        if self.a <= 2:
            return np.inf
        return self.b**2 / ((self.a - 1.0) ** 2 * (self.a - 2.0))


@dataclass(frozen=True)
class Beta:
    a: float
    b: float

    def __post_init__(self):
        _positive(a=self.a, b=self.b)

    def sample(self, rng, size=None):
        return rng.beta(self.a, self.b, size)

    def mean(self):
        return self.a / (self.a + self.b)

    def var(self):
        s = self.a + self.b
        return self.a * self.b / (s * s * (s + 1.0))


@dataclass(frozen=True)
class StudentT:
    """Centered Student-t with ``dof`` degrees of freedom and squared scale ``scale2``."""

    dof: float
    scale2: float = 1.0

    def __post_init__(self):
        _positive(dof=self.dof, scale2=self.scale2)

    def sample(self, rng, size=None):
        g = rng.gamma(0.5 * self.dof, 2.0 / self.dof, size)
        return np.sqrt(self.scale2 / g) * rng.standard_normal(size)

    def mean(self):
        return 0.0 if self.dof > 1 else np.nan

    def var(self):
        return self.scale2 * self.dof / (self.dof - 2.0) if self.dof > 2 else np.inf


ScalarLaw = Union[Uniform, Normal, Gamma, InverseGamma, Beta, StudentT]


def sample(law: ScalarLaw, rng: np.random.Generator, size=None):
    """One variate (or an array of ``size`` variates) from ``law``."""
    return law.sample(rng, size)


def sample_student_t_vector(dof, scales, rng, size=None):
    """Draw from the p-variate Student-t with diagonal scale matrix ``diag(scales)``.

    Uses the gamma scale mixture: ``g ~ Gamma(dof/2, rate=dof/2)`` shared by all
    coordinates, then independent normals with variance ``scales[i] / g``.
    ``size`` adds leading batch dimensions, each with its own ``g``.
    """
    scales = np.asarray(scales, dtype=float)
    _positive(dof=float(dof))
    if scales.ndim != 1 or np.any(~np.isfinite(scales)) or np.any(scales <= 0):
        raise ParameterError("scales must be a vector of positive finite reals")
    batch = () if size is None else tuple(np.atleast_1d(size))
    g = rng.gamma(0.5 * dof, 2.0 / dof, batch)
    z = rng.standard_normal(batch + scales.shape)
    return z * np.sqrt(scales / np.expand_dims(g, -1))
