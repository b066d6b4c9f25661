"""Data-augmentation Gibbs sampler for the random-c normal scale mixture.

Model: c_i i.i.d. Uniform(c_lo, c_hi), lam ~ InverseGamma(a, b) independent of
c, and X_i | lam, c ~ N(0, lam c_i). The knockoff of ``x`` is drawn by Gibbs
sampling (x~, lam, c) from the density proportional to
prod_i f_i(x_i | lam, c) f_i(x~_i | lam, c) psi(lam) q(c).

A sweep updates x~, then lam, then every c_i (Metropolis-Hastings with a
log-scale random walk). Chains for different rows of ``x`` are independent and
are advanced together as one batch.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from cik import gauss
from cik.models import GaussMixModel, check_support
from cik.rng import ParameterError


@dataclass(frozen=True)
class GibbsConfig:
    burn_in: int = 1000
    thin: int = 10
    n_draws: int = 1
    mh_step: float = 0.5

    def __post_init__(self):
        if self.burn_in < 0 or self.thin < 1 or self.n_draws < 1:
            raise ParameterError("need burn_in >= 0, thin >= 1, n_draws >= 1")
        if not self.mh_step > 0:
            raise ParameterError("mh_step must be > 0")

    def to_dict(self):
        return asdict(self)


@dataclass
class GibbsState:
    x_tilde: np.ndarray
    lam: np.ndarray
    c: np.ndarray
    iteration: int = 0
    n_accept: int = 0
    n_propose: int = 0

    @property
    def acceptance_rate(self):
        return self.n_accept / self.n_propose if self.n_propose else float("nan")


def _as_fixed_c(spec):
    return GaussMixModel(spec.a, spec.b, [spec.c_lo] * spec.p)


def init_state(spec, x, rng):
    """Start at c = midpoint of its range and lam drawn from lam | x, c."""
    x = check_support(spec, x)
    c = np.full(x.shape, 0.5 * (spec.c_lo + spec.c_hi))
    rate = spec.b + np.sum(x * x / (2.0 * c), axis=-1)
    lam = rate / rng.gamma(spec.a + 0.5 * spec.p, 1.0, size=np.shape(rate))
    return GibbsState(np.zeros_like(x), np.asarray(lam, dtype=float), c)


def update_x_tilde(lam, c, rng):
    """x~_i ~ N(0, lam c_i) independently."""
    return rng.standard_normal(np.shape(c)) * np.sqrt(np.expand_dims(lam, -1) * c)


def update_lambda(spec, x, x_tilde, c, rng):
    """lam ~ InverseGamma(a + p, b + sum (x_i^2 + x~_i^2) / 2c_i)."""
    rate = spec.b + np.sum((x * x + x_tilde * x_tilde) / (2.0 * c), axis=-1)
    return np.asarray(rate / rng.gamma(spec.a + spec.p, 1.0, size=np.shape(rate)), dtype=float)


def update_c(spec, x, x_tilde, lam, c, rng, mh_step=0.5):
    """One log-scale random-walk Metropolis move per c_i; returns ``(c, n_accept)``.

    The conditional of c_i is proportional to q(c_i) / c_i exp(-r_i / c_i)
    with r_i = (x_i^2 + x~_i^2) / 2 lam. In log c the 1/c_i cancels against
    the Jacobian, leaving exp(-r_i / c_i) on [c_lo, c_hi].
    """
    r = (x * x + x_tilde * x_tilde) / (2.0 * np.expand_dims(lam, -1))
    prop = c * np.exp(mh_step * rng.standard_normal(c.shape))
    log_alpha = r / c - r / prop
    inside = (prop >= spec.c_lo) & (prop <= spec.c_hi)
    accept = inside & (np.log(rng.uniform(size=c.shape)) < log_alpha)
    return np.where(accept, prop, c), int(accept.sum())


def gibbs_step(spec, x, state, rng, mh_step=0.5):
    """One sweep x~ -> lam -> c; returns a new :class:`GibbsState`."""
    x = np.asarray(x, dtype=float)
    c = state.c
    xt = update_x_tilde(state.lam, c, rng)
    lam = update_lambda(spec, x, xt, c, rng)
    n_acc = n_prop = 0
    if not spec.degenerate:
        c, n_acc = update_c(spec, x, xt, lam, c, rng, mh_step)
        n_prop = c.size
    return GibbsState(
        xt, lam, c, state.iteration + 1, state.n_accept + n_acc, state.n_propose + n_prop
    )


def run_chain(spec, x, config, rng, state=None):
    """Burn in, then collect ``n_draws`` draws of x~ spaced ``thin`` sweeps apart.

    Returns ``(draws, state)`` with ``draws`` of shape ``(n_draws,) + x.shape``.
    """
    x = check_support(spec, x)
    if state is None:
        state = init_state(spec, x, rng)
    for _ in range(config.burn_in):
        state = gibbs_step(spec, x, state, rng, config.mh_step)
    draws = np.empty((config.n_draws,) + x.shape)
    for k in range(config.n_draws):
        for _ in range(config.thin):
            state = gibbs_step(spec, x, state, rng, config.mh_step)
        draws[k] = state.x_tilde
    return draws, state


def sample_knockoff(spec, x, rng, config=None):
    """Knockoff(s) of ``x``; one draw with the shape of ``x`` unless ``config.n_draws > 1``."""
    config = config or GibbsConfig()
    draws, _ = run_chain(spec, x, config, rng)
    return draws[0] if config.n_draws == 1 else draws


def sample_x(spec, rng, n=None):
    shape = () if n is None else (n,)
    lam = 1.0 / rng.gamma(spec.a, 1.0 / spec.b, size=shape)
    c = rng.uniform(spec.c_lo, spec.c_hi, size=shape + (spec.p,))
    return rng.standard_normal(shape + (spec.p,)) * np.sqrt(np.expand_dims(lam, -1) * c)


_C_NODES = np.polynomial.legendre.leggauss(48)


def _log_mix_factor(spec, v, lam, power):
    """log of E_c[ N(.;0,lam c)-product ] for one coordinate, vectorised over lam.

    ``v`` is x_i^2 (power=1) or x_i^2 + x~_i^2 (power=2).
    """
    z, w = _C_NODES
    cc = spec.c_lo + 0.5 * (spec.c_hi - spec.c_lo) * (z + 1.0)
    lw = np.log(0.5 * w)
    var = np.outer(lam, cc)
    vals = -0.5 * power * np.log(2 * np.pi * var) - v / (2.0 * var)
    return logsumexp(vals + lw, axis=1)


def _log_integral_over_lambda(spec, log_given_lam):
    """log int psi(lam) exp(log_given_lam(lam)) dlam.

    Trapezoid rule in u = log lam around the mode; the integrand is smooth and
    decays doubly exponentially in u, so the rule converges geometrically.
    """
    a, b = spec.a, spec.b

    def logf(u):
        lam = np.exp(u)
        return a * np.log(b) - gammaln(a) - a * u - b / lam + log_given_lam(lam)

    coarse = np.linspace(-40.0, 40.0, 801)
    centre = coarse[np.argmax(logf(coarse))]
    u = np.linspace(centre - 25.0, centre + 25.0, 5001)
    vals = logf(u)
    vals[[0, -1]] -= np.log(2.0)
    return float(logsumexp(vals) + np.log(u[1] - u[0]))


def log_density_x(spec, x):
    """log h(x) by nested quadrature (exact Student-t formula when c is a point mass)."""
    x = check_support(spec, x)
    if spec.degenerate:
        return gauss.log_density_x(_as_fixed_c(spec), x)

    def given(lam):
        return sum(_log_mix_factor(spec, xi * xi, lam, 1) for xi in x)

    return float(_log_integral_over_lambda(spec, given))


def log_density_joint(spec, x, x_tilde):
    x = check_support(spec, x)
    xt = check_support(spec, x_tilde)
    if spec.degenerate:
        return gauss.log_density_joint(_as_fixed_c(spec), x, xt)

    def given(lam):
        return sum(
            _log_mix_factor(spec, xi * xi + ti * ti, lam, 2) for xi, ti in zip(x, xt)
        )

    return float(_log_integral_over_lambda(spec, given))


def sample_latent(spec, rng, n=None):
    shape = () if n is None else (n,)
    lam = 1.0 / rng.gamma(spec.a, 1.0 / spec.b, size=shape)
    c = rng.uniform(spec.c_lo, spec.c_hi, size=shape + (spec.p,))
    return lam, c


def sample_given_latent(spec, latent, rng):
    lam, c = latent
    lam = np.asarray(lam, dtype=float)
    return rng.standard_normal(np.shape(c)) * np.sqrt(lam[..., None] * c)
