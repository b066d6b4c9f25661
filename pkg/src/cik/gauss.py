"""Scale mixtures of centered normals with inverse-gamma lam and fixed c.

X_i | lam ~ N(0, lam c_i) independently and lam ~ InverseGamma(a, b). The
marginal of X, the joint of (X, X~) and the conditional of X~ given X are all
diagonal multivariate Student-t laws.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from cik.models import check_support
from cik.rng import InverseGamma, ParameterError, sample_student_t_vector


@dataclass(frozen=True)
class StudentTParams:
    dof: float
    scales: np.ndarray

    def __post_init__(self):
        if not self.dof > 0 or np.any(np.asarray(self.scales) <= 0):
            raise ParameterError("Student-t parameters must be positive")


def student_t_logpdf(z, dof, scales):
    """Log density of the m-variate Student-t with diagonal scale matrix ``diag(scales)``.

    ``z`` may carry leading batch dimensions.
    """
    z = np.asarray(z, dtype=float)
    scales = np.asarray(scales, dtype=float)
    m = scales.shape[-1]
    quad = np.sum(z * z / scales, axis=-1)
    return (
        gammaln(0.5 * (m + dof))
        - gammaln(0.5 * dof)
        - 0.5 * m * np.log(dof * np.pi)
        - 0.5 * np.sum(np.log(scales), axis=-1)
        - 0.5 * (m + dof) * np.log1p(quad / dof)
    )


def _energy(spec, sq):
    return spec.b + np.sum(sq / (2.0 * np.asarray(spec.c)), axis=-1)


def log_density_x(spec, x):
    """log h(x); ``x`` may be a single vector or rows."""
    x = check_support(spec, x)
    a, b, p = spec.a, spec.b, spec.p
    c = np.asarray(spec.c)
    return (
        a * np.log(b)
        + gammaln(a + 0.5 * p)
        - 0.5 * p * np.log(2 * np.pi)
        - gammaln(a)
        - 0.5 * np.sum(np.log(c))
        - (a + 0.5 * p) * np.log(_energy(spec, x * x))
    )


def log_density_joint(spec, x, x_tilde):
    """log f(x, x~); depends on each pair only through x_i^2 + x~_i^2."""
    x = check_support(spec, x)
    xt = check_support(spec, x_tilde)
    a, b, p = spec.a, spec.b, spec.p
    c = np.asarray(spec.c)
    return (
        a * np.log(b)
        + gammaln(a + p)
        - p * np.log(2 * np.pi)
        - gammaln(a)
        - np.sum(np.log(c))
        - (a + p) * np.log(_energy(spec, x * x + xt * xt))
    )


def marginal_params(spec):
    return StudentTParams(2.0 * spec.a, (spec.b / spec.a) * np.asarray(spec.c))


def conditional_params(spec, x):
    """Student-t parameters of X~ | X = x: dof 2a + p, scales 2/(2a+p) (b + sum x_i^2/2c_i) c."""
    x = check_support(spec, x)
    if x.ndim != 1:
        raise ValueError("conditional_params takes a single vector")
    k = 2.0 * spec.a + spec.p
    return StudentTParams(k, (2.0 / k) * _energy(spec, x * x) * np.asarray(spec.c))


def posterior_lambda(spec, x):
    """InverseGamma law of lam given X = x (one vector)."""
    x = check_support(spec, x)
    return InverseGamma(spec.a + 0.5 * spec.p, float(_energy(spec, x * x)))


def sample_x(spec, rng, n=None):
    """Rows from the marginal: lam ~ InverseGamma(a, b) per row, then X_i ~ N(0, lam c_i)."""
    c = np.asarray(spec.c)
    shape = () if n is None else (n,)
    lam = 1.0 / rng.gamma(spec.a, 1.0 / spec.b, size=shape)
    z = rng.standard_normal(shape + c.shape)
    return z * np.sqrt(np.expand_dims(lam, -1) * c)


def sample_knockoff(spec, x, rng, return_lambda=False):
    """lam | x ~ InverseGamma(a + p/2, b + sum x_i^2 / 2c_i), then X~_i ~ N(0, lam c_i)."""
    x = check_support(spec, x)
    c = np.asarray(spec.c)
    rate = _energy(spec, x * x)
    lam = rate / rng.gamma(spec.a + 0.5 * spec.p, 1.0, size=np.shape(rate))
    z = rng.standard_normal(x.shape)
    xt = z * np.sqrt(np.expand_dims(lam, -1) * c)
    return (xt, lam) if return_lambda else xt


def sample_knockoff_direct(spec, x, rng):
    """Direct multivariate-t draw from ``conditional_params``; kept as an oracle."""
    prm = conditional_params(spec, x)
    return sample_student_t_vector(prm.dof, prm.scales, rng)


def sample_latent(spec, rng, n=None):
    return 1.0 / rng.gamma(spec.a, 1.0 / spec.b, size=n)


def sample_given_latent(spec, lam, rng):
    lam = np.asarray(lam, dtype=float)
    c = np.asarray(spec.c)
    return rng.standard_normal(lam.shape + c.shape) * np.sqrt(lam[..., None] * c)
