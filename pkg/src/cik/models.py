"""Covariate model specifications and the shared generator contract.

Each model variant lives in its own module (``binary``, ``ternary``, ``gauss``,
``gibbs``) exposing ``sample_x``, ``sample_knockoff``, ``log_density_x`` and
``log_density_joint``. The functions here dispatch on the spec type.
"""

from __future__ import annotations

import importlib
import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from cik.rng import ParameterError


class DomainError(ValueError):
    """A point lies outside the support of the model."""


class SizeError(ValueError):
    """Exact enumeration requested for a model too large to enumerate."""


def _as_c(c):
    c = tuple(float(v) for v in np.atleast_1d(np.asarray(c, dtype=float)))
    if len(c) < 1:
        raise ParameterError("c must have at least one entry (p >= 1)")
    return c


@dataclass(frozen=True)
class BinaryModel:
    """X_i | lam ~ Bernoulli(lam * c_i) independently, lam ~ Uniform(0, 1)."""

    c: tuple
    variant = "binary"
    support = (0, 1)

    def __post_init__(self):
        object.__setattr__(self, "c", _as_c(self.c))
        if not all(0.0 < v < 1.0 for v in self.c):
            raise ParameterError("binary model needs every c_i in (0, 1)")

    @property
    def p(self):
        return len(self.c)


@dataclass(frozen=True)
class TernaryModel:
    """P(X_i = 0, 1, 2 | lam) = (lam (1 - c_i), lam c_i, 1 - lam), lam ~ Beta(a, b)."""

    a: float
    b: float
    c: tuple
    variant = "ternary"
    support = (0, 1, 2)

    def __post_init__(self):
        object.__setattr__(self, "c", _as_c(self.c))
        if not all(0.0 < v < 1.0 for v in self.c):
            raise ParameterError("ternary model needs every c_i in (0, 1)")
        _check_ab(self.a, self.b)

    @property
    def p(self):
        return len(self.c)


@dataclass(frozen=True)
class GaussMixModel:
    """X_i | lam ~ N(0, lam c_i) independently, lam ~ InverseGamma(a, b)."""

    a: float
    b: float
    c: tuple
    variant = "gauss-mix"
    support = None

    def __post_init__(self):
        object.__setattr__(self, "c", _as_c(self.c))
        if not all(v > 0.0 and np.isfinite(v) for v in self.c):
            raise ParameterError("gauss-mix model needs every c_i > 0")
        _check_ab(self.a, self.b)

    @property
    def p(self):
        return len(self.c)


@dataclass(frozen=True)
class GibbsMixModel:
    """As :class:`GaussMixModel` but with c_i i.i.d. Uniform(c_lo, c_hi), independent of lam.

    ``c_lo == c_hi`` is allowed and makes c a point mass.
    """

    a: float
    b: float
    c_lo: float
    c_hi: float
    p: int
    variant = "gibbs-mix"
    support = None

    def __post_init__(self):
        _check_ab(self.a, self.b)
        if not (0.0 < self.c_lo <= self.c_hi < np.inf):
            raise ParameterError("gibbs-mix needs 0 < c_lo <= c_hi < inf")
        if int(self.p) != self.p or self.p < 1:
            raise ParameterError("p must be a positive integer")
        object.__setattr__(self, "p", int(self.p))

    @property
    def degenerate(self):
        return self.c_lo == self.c_hi


def _check_ab(a, b):
    if not (np.isfinite(a) and np.isfinite(b) and a > 0 and b > 0):
        raise ParameterError(f"need a > 0 and b > 0, got a={a}, b={b}")


ModelSpec = BinaryModel | TernaryModel | GaussMixModel | GibbsMixModel

_VARIANTS = {
    "binary": BinaryModel,
    "ternary": TernaryModel,
    "gauss-mix": GaussMixModel,
    "gibbs-mix": GibbsMixModel,
}
_MODULES = {
    "binary": "cik.binary",
    "ternary": "cik.ternary",
    "gauss-mix": "cik.gauss",
    "gibbs-mix": "cik.gibbs",
}


def model_to_dict(spec) -> dict:
    d = {"variant": spec.variant, "p": spec.p}
    if spec.variant != "binary":
        d["a"] = float(spec.a)
        d["b"] = float(spec.b)
    if spec.variant == "gibbs-mix":
        d["c_prior"] = [float(spec.c_lo), float(spec.c_hi)]
    else:
        d["c"] = [float(v) for v in spec.c]
    return d


def model_from_dict(d: dict, path: str = "model"):
    """Build a spec from its JSON object form, rejecting unknown or missing fields."""
    from cik.io import SchemaError

    if not isinstance(d, dict):
        raise SchemaError(f"{path}: expected an object")
    variant = d.get("variant")
    if variant not in _VARIANTS:
        raise SchemaError(f"{path}.variant: expected one of {sorted(_VARIANTS)}, got {variant!r}")
    allowed = {"variant", "p"}
    required = set()
    if variant != "binary":
        allowed |= {"a", "b"}
        required |= {"a", "b"}
    if variant == "gibbs-mix":
        allowed.add("c_prior")
        required |= {"c_prior", "p"}
    else:
        allowed.add("c")
        required.add("c")
    unknown = sorted(set(d) - allowed)
    if unknown:
        raise SchemaError(f"{path}: unknown field(s) {', '.join(path + '.' + u for u in unknown)}")
    missing = sorted(required - set(d))
    if missing:
        raise SchemaError(f"{path}: missing field(s) {', '.join(path + '.' + m for m in missing)}")
    try:
        if variant == "gibbs-mix":
            lo, hi = d["c_prior"]
            spec = GibbsMixModel(float(d["a"]), float(d["b"]), float(lo), float(hi), int(d["p"]))
        elif variant == "binary":
            spec = BinaryModel(d["c"])
        else:
            spec = _VARIANTS[variant](float(d["a"]), float(d["b"]), d["c"])
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{path}: {e}") from e
    if "p" in d and int(d["p"]) != spec.p:
        raise SchemaError(f"{path}.p: {d['p']} does not match len(c) = {spec.p}")
    return spec


def _impl(spec):
    return importlib.import_module(_MODULES[spec.variant])


def check_support(spec, x):
    """Validate ``x`` (shape ``(p,)`` or ``(n, p)``) against the model; return it as an array."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1:] != (spec.p,):
        raise DomainError(f"expected trailing dimension p={spec.p}, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite value")
    if spec.support is not None:
        ok = x == spec.support[0]
        for v in spec.support[1:]:
            ok |= x == v
        if not ok.all():
            raise DomainError(f"values outside support {spec.support}")
    return x


def sample_x(spec, rng, n=None):
    """Draw ``n`` rows (or one vector when ``n`` is None) from the covariate law."""
    return _impl(spec).sample_x(spec, rng, n)


def sample_knockoff(spec, x, rng, **kwargs):
    """Draw the conditional-independence knockoff for each row of ``x``."""
    return _impl(spec).sample_knockoff(spec, x, rng, **kwargs)


def log_density_x(spec, x):
    return _impl(spec).log_density_x(spec, x)


def log_density_joint(spec, x, x_tilde):
    return _impl(spec).log_density_joint(spec, x, x_tilde)


@dataclass
class KnockoffDraw:
    x: np.ndarray
    x_tilde: np.ndarray
    latent_trace: Optional[dict] = None
    seed: Optional[int] = None

    def __post_init__(self):
        if np.shape(self.x) != np.shape(self.x_tilde):
            raise ValueError("x and x_tilde must have equal shape")


def draw_pair(spec, rng, n=None, seed=None) -> KnockoffDraw:
    x = sample_x(spec, rng, n)
    xt = sample_knockoff(spec, x, rng)
    return KnockoffDraw(x, xt, seed=seed)


def swap(x, x_tilde, i):
    """Apply the swap map exchanging coordinate ``i`` of ``x`` with that of ``x_tilde``."""
    x = np.array(x, copy=True)
    xt = np.array(x_tilde, copy=True)
    x[..., i], xt[..., i] = xt[..., i].copy(), x[..., i].copy()
    return x, xt


@dataclass
class JointLawTable:
    """Exact pmf over pairs (x, x_tilde); rows of ``x`` and ``x_tilde`` index the support."""

    x: np.ndarray
    x_tilde: np.ndarray
    prob: np.ndarray
    _index: dict = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.int64)
        self.x_tilde = np.asarray(self.x_tilde, dtype=np.int64)
        self.prob = np.asarray(self.prob, dtype=float)
        if np.any(self.prob < 0):
            raise ValueError("negative probability in table")
        self._index = {
            (tuple(a), tuple(b)): k for k, (a, b) in enumerate(zip(self.x, self.x_tilde))
        }

    @property
    def p(self):
        return self.x.shape[1]

    def total(self):
        return float(self.prob.sum())

    def get(self, x, x_tilde):
        k = self._index.get((tuple(int(v) for v in x), tuple(int(v) for v in x_tilde)))
        return 0.0 if k is None else float(self.prob[k])

    def marginal_x(self):
        out = {}
        for a, pr in zip(map(tuple, self.x), self.prob):
            out[a] = out.get(a, 0.0) + pr
        return out

    def marginal_x_tilde(self):
        out = {}
        for a, pr in zip(map(tuple, self.x_tilde), self.prob):
            out[a] = out.get(a, 0.0) + pr
        return out

    def swapped(self, i):
        xs, xts = swap(self.x, self.x_tilde, i)
        return JointLawTable(xs, xts, self.prob.copy())

    def max_abs_diff(self, other):
        keys = set(self._index) | set(other._index)
        return max(
            abs(self.get(a, b) - other.get(a, b)) for a, b in keys
        )

    def cov(self, i):
        """cov(X_i, X~_i) under the table."""
        xi = self.x[:, i]
        ti = self.x_tilde[:, i]
        m1 = self.prob @ xi
        m2 = self.prob @ ti
        return float(self.prob @ (xi * ti) - m1 * m2)


def enumerate_joint(spec, max_p=3):
    """Exact :class:`JointLawTable` for a discrete model by brute-force enumeration."""
    if spec.support is None:
        raise DomainError(f"{spec.variant} is continuous; no finite table")
    if spec.p > max_p:
        raise SizeError(f"p={spec.p} exceeds enumeration limit {max_p}")
    impl = _impl(spec)
    pts = np.array(list(itertools.product(spec.support, repeat=spec.p)), dtype=np.int64)
    xs = np.repeat(pts, len(pts), axis=0)
    xts = np.tile(pts, (len(pts), 1))
    prob = np.exp(impl.log_density_joint_rows(spec, xs, xts))
    return JointLawTable(xs, xts, prob)
