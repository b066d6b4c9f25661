"""Gaussian smoothing of an arbitrary covariate law and its knockoff coupling.

For a law mu (represented here by a finite list of atoms, i.e. its empirical
measure) and a variance c, the smoothed law mu0 = int N_p(x, cI) mu(dx) has
conditionally independent coordinates given the atom. If T ~ mu0 its
conditional-independence knockoff satisfies (T, T~) ~ (L + M, L + N) with
L ~ mu and M, N independent N_p(0, cI).

Two choices of c are supported:

* ``"bl"``: c = eps^2 / (2p), which keeps the bounded-Lipschitz distance
  between mu and mu0 below eps / sqrt(2);
* ``"tv"``: c = (eps / (lip_b * vol_B))^2 / (4p) for a law with a lip_b-Lipschitz
  density and a set B of volume vol_B carrying all but eps/2 of its mass,
  which keeps the total-variation distance below eps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal
from scipy.integrate import trapezoid
from scipy.special import logsumexp

from cik.rng import ParameterError


class InputError(ValueError):
    """Density inputs that fail a sanity check."""


def smoothing_variance(epsilon, p, mode="bl", lip_b=None, vol_B=None):
    if not epsilon > 0:
        raise ParameterError("epsilon must be > 0")
    if int(p) != p or p < 1:
        raise ParameterError("p must be a positive integer")
    if mode == "bl":
        return epsilon**2 / (2.0 * p)
    if mode == "tv":
        if lip_b is None or vol_B is None:
            raise ParameterError("tv mode needs lip_b and vol_B")
        if not lip_b > 0 or not (0 < vol_B < np.inf):
            raise ParameterError("need lip_b > 0 and 0 < vol_B < inf")
        return (epsilon / (lip_b * vol_B)) ** 2 / (4.0 * p)
    raise ParameterError(f"unknown mode {mode!r}; expected 'bl' or 'tv'")


def box_volume(atoms, c):
    """Volume of the atoms' bounding box inflated by 3 sqrt(c) on every side."""
    atoms = np.atleast_2d(atoms)
    widths = atoms.max(axis=0) - atoms.min(axis=0) + 6.0 * np.sqrt(c)
    return float(np.prod(widths))


def tv_variance_with_default_box(atoms, epsilon, lip_b):
    """Solve c = tv-variance(vol_B(c)) where B is the inflated bounding box.

    The right-hand side decreases in c, so the fixed point is unique.
    """
    atoms = np.atleast_2d(atoms)
    p = atoms.shape[1]

    def gap(c):
        return c - smoothing_variance(epsilon, p, "tv", lip_b, box_volume(atoms, c))

    hi = 1.0
    while gap(hi) < 0:
        hi *= 4.0
    c = optimize.brentq(gap, 1e-300, hi, xtol=1e-300, rtol=1e-14)
    return c, box_volume(atoms, c)


@dataclass(frozen=True)
class SmoothedMeasure:
    atoms: np.ndarray
    c_smooth: float
    epsilon: float
    mode: str = "bl"

    def __post_init__(self):
        atoms = np.atleast_2d(np.asarray(self.atoms, dtype=float))
        if atoms.shape[0] == 0:
            raise ParameterError("atoms must be nonempty")
        if not np.all(np.isfinite(atoms)):
            raise ParameterError("atoms must be finite")
        object.__setattr__(self, "atoms", atoms)
        if not self.c_smooth >= 0:
            raise ParameterError("c_smooth must be >= 0")

    @property
    def p(self):
        return self.atoms.shape[1]

    @classmethod
    def build(cls, atoms, epsilon, mode="bl", lip_b=None, vol_B=None):
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        p = atoms.shape[1]
        if mode == "tv" and vol_B is None:
            if lip_b is None:
                raise ParameterError("tv mode needs lip_b")
            c, _ = tv_variance_with_default_box(atoms, epsilon, lip_b)
        else:
            c = smoothing_variance(epsilon, p, mode, lip_b, vol_B)
        return cls(atoms, c, epsilon, mode)

    def density(self, points):
        """Density of mu0 at ``points`` (shape (..., p)): atom average of Gaussian kernels."""
        pts = np.asarray(points, dtype=float)
        d2 = np.sum((pts[..., None, :] - self.atoms) ** 2, axis=-1)
        logk = -d2 / (2 * self.c_smooth) - 0.5 * self.p * np.log(2 * np.pi * self.c_smooth)
        return np.exp(logsumexp(logk, axis=-1) - np.log(len(self.atoms)))


def sample_pair(measure, rng, n=None):
    """(L + M, L + N) with L uniform over the atoms and M, N ~ N_p(0, c I)."""
    shape = () if n is None else (n,)
    idx = rng.integers(len(measure.atoms), size=shape)
    L = measure.atoms[idx]
    s = np.sqrt(measure.c_smooth)
    m = s * rng.standard_normal(L.shape)
    k = s * rng.standard_normal(L.shape)
    return L + m, L + k


def atom_posterior(measure, t):
    """Posterior weights of the atoms given T = t (rows of ``t`` give rows of weights)."""
    t = np.asarray(t, dtype=float)
    d2 = np.sum((t[..., None, :] - measure.atoms) ** 2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        logw = -d2 / (2.0 * measure.c_smooth)
        return np.exp(logw - logsumexp(logw, axis=-1, keepdims=True)), d2


def knockoff_given_t(measure, t, rng, return_flags=False):
    """Knockoff of ``t`` under mu0: pick atom j with weight prop. to phi_{x_j}(t), add noise.

    Rows whose weights cannot be normalised fall back to the nearest atom;
    ``return_flags=True`` also returns a boolean mask of those rows.
    """
    t = np.asarray(t, dtype=float)
    single = t.ndim == 1
    tt = np.atleast_2d(t)
    w, d2 = atom_posterior(measure, tt)
    bad = ~np.all(np.isfinite(w), axis=1)
    u = rng.uniform(size=len(tt))
    cdf = np.cumsum(np.where(bad[:, None], 0.0, w), axis=1)
    idx = np.minimum((cdf < (u * cdf[:, -1])[:, None]).sum(axis=1), len(measure.atoms) - 1)
    idx = np.where(bad, np.argmin(d2, axis=1), idx)
    out = measure.atoms[idx] + np.sqrt(measure.c_smooth) * rng.standard_normal(tt.shape)
    if single:
        out, bad = out[0], bad[0]
    return (out, bad) if return_flags else out


@dataclass(frozen=True)
class DTVResult:
    value: float
    discretization_bound: float


def _grid_integral(vals, grid):
    if isinstance(grid, tuple):
        gx, gy = grid
        return trapezoid(trapezoid(vals, gy, axis=1), gx)
    return trapezoid(vals, grid)


def _evaluate(density, grid):
    if callable(density):
        if isinstance(grid, tuple):
            gx, gy = np.meshgrid(*grid, indexing="ij")
            return np.asarray(density(np.stack([gx, gy], axis=-1)), dtype=float)
        return np.asarray(density(np.asarray(grid)), dtype=float)
    return np.asarray(density, dtype=float)


def dtv_estimate(density_f, density_f0, grid, norm_tol=1e-3):
    """Trapezoid estimate of (1/2) int |f - f0| over ``grid``.

    ``grid`` is a 1-D array (p = 1) or a pair of 1-D arrays (p = 2). The
    densities are callables or arrays of values on the grid. The reported
    discretization bound is the change from halving the resolution.
    """
    if isinstance(grid, (list, tuple)) and len(grid) == 2 and np.ndim(grid[0]) == 1:
        grid = (np.asarray(grid[0], float), np.asarray(grid[1], float))
    else:
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1:
            raise InputError("grid must be a 1-D array or a pair of 1-D arrays (p <= 2)")
    f = _evaluate(density_f, grid)
    f0 = _evaluate(density_f0, grid)
    for name, v in (("f", f), ("f0", f0)):
        mass = _grid_integral(v, grid)
        if abs(mass - 1.0) > norm_tol:
            raise InputError(f"density {name} integrates to {mass:.6g} on the grid, not 1")
    diff = np.abs(f - f0)
    value = 0.5 * _grid_integral(diff, grid)
    if isinstance(grid, tuple):
        coarse = 0.5 * _grid_integral(diff[::2, ::2], (grid[0][::2], grid[1][::2]))
    else:
        coarse = 0.5 * _grid_integral(diff[::2], grid[::2])
    return DTVResult(float(value), float(abs(value - coarse)))


def smooth_density_1d(f_vals, grid, c):
    """Values of f * N(0, c) on a uniform 1-D ``grid`` (f taken as zero off the grid)."""
    h = grid[1] - grid[0]
    half = int(np.ceil(8.0 * np.sqrt(c) / h))
    k = np.arange(-half, half + 1) * h
    kernel = np.exp(-k * k / (2.0 * c)) / np.sqrt(2 * np.pi * c) * h
    return signal.fftconvolve(f_vals, kernel, mode="same")


@dataclass(frozen=True)
class BLBound:
    estimate: float
    se: float
    bound: float


def dbl_bound_check(measure, n_draws, rng):
    """Monte Carlo E||M|| for M ~ N_p(0, c I), the quantity that bounds d_BL(mu, mu0).

    ``bound`` is sqrt(p c), which equals eps / sqrt(2) in ``"bl"`` mode.
    """
    if n_draws < 10_000:
        raise ParameterError("n_draws must be >= 1e4")
    m = np.sqrt(measure.c_smooth) * rng.standard_normal((n_draws, measure.p))
    norms = np.linalg.norm(m, axis=1)
    return BLBound(
        float(norms.mean()),
        float(norms.std(ddof=1) / np.sqrt(n_draws)),
        float(np.sqrt(measure.p * measure.c_smooth)),
    )
