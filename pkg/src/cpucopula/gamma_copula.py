"""Gamma partition-of-unity copula.

The latent law of coordinate ``k`` is inverse Pareto with density
``a s**(a-1) / (1+s)**(a+1)`` and distribution function
``(s / (1+s))**a``. Given a latent ``s``, a coordinate is ``exp(-X)`` with
``X ~ Gamma(a + 1, rate = 1 + s)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from cpucopula.batch import SampleBatch, to_open_unit
from cpucopula.drivers import DriverSpec, sample_driver
from cpucopula.errors import DomainError, SpecError
from cpucopula.numerics import RandomSource, log_binom, quad_semi_infinite, sample_gamma


@dataclass(frozen=True)
class GammaParams:
    """Per-dimension shapes ``a_1, ..., a_d > 0``."""

    a: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in np.atleast_1d(self.a))
        if not a or any(not x > 0 for x in a):
            raise SpecError(f"Gamma shapes must be positive, got {a}")
        object.__setattr__(self, "a", a)

    @property
    def d(self) -> int:
        return len(self.a)


def _check_shape(a):
    if not np.all(np.asarray(a) > 0):
        raise DomainError(f"shape must be positive, got {a}")


def alpha(a, s):
    """Inverse Pareto density ``a s**(a-1) / (1+s)**(a+1)``."""
    _check_shape(a)
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise DomainError("alpha needs s > 0")
    return np.exp(np.log(a) + (a - 1) * np.log(s) - (a + 1) * np.log1p(s))


def marginal_cdf(a, s):
    """Latent distribution function ``(s / (1+s))**a``."""
    s = np.asarray(s, dtype=float)
    if np.any(~(s >= 0)):
        raise DomainError("marginal_cdf needs s >= 0")
    with np.errstate(divide="ignore"):
        return np.exp(-a * np.log1p(1.0 / s))


def marginal_quantile(a, u):
    """Latent quantile ``u**(1/a) / (1 - u**(1/a))``."""
    _check_shape(a)
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("marginal_quantile needs 0 < u < 1")
    log_root = np.log(u) / a
    return np.exp(log_root) / -np.expm1(log_root)


def _neg_log(u):
    """``-log(u)`` with full relative accuracy near ``u = 1``."""
    u = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(u > 0.5, -np.log1p(u - 1.0), -np.log(u))


def conditional_density(a, s, u):
    """Density of a coordinate given latent ``s``: ``(1+s)**(a+1) L(u)**a u**s / Gamma(a+1)``."""
    x = _neg_log(u)
    return np.exp((a + 1) * np.log1p(s) + a * np.log(x) - s * x - gammaln(a + 1.0))


def conditional_sample(a, s, rng: RandomSource):
    """Draw ``exp(-X)`` with ``X ~ Gamma(a + 1, rate 1 + s)`` for each latent ``s``."""
    _check_shape(a)
    s = np.asarray(s, dtype=float)
    if np.any(~(s > 0)):
        raise DomainError("conditional_sample needs s > 0")
    x = sample_gamma(np.asarray(a, dtype=float) + 1.0, 1.0 + s, rng, size=s.shape)
    return to_open_unit(np.exp(-x))


def sample(params: GammaParams, driver: DriverSpec, count: int, rng: RandomSource) -> SampleBatch:
    """Two-step sampler: latent ``S = Q(U)`` from the driver, then ``V | S``.

    The returned batch carries ``V`` as ``values`` and ``S`` as ``latent``.
    """
    if driver.d != params.d:
        raise SpecError(f"driver has dimension {driver.d}, parameters have {params.d}")
    driven = sample_driver(driver, count, rng)
    meta = dict(driven.meta, copula="gamma", a=list(params.a))
    if count == 0:
        return SampleBatch(driven.values, latent=driven.values.copy(), cells=driven.cells, meta=meta)
    a = np.asarray(params.a)
    latent = marginal_quantile(a, driven.values)
    values = conditional_sample(a, latent, rng)
    return SampleBatch(values, latent=latent, cells=driven.cells, meta=meta)


def log_density_singular_int(a: int, u, v):
    """Log of the closed-form diagonal-dominant density for integer ``a``."""
    if int(a) != a or a < 1:
        raise DomainError(f"closed form needs a positive integer a, got {a}")
    a = int(a)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(~((u > 0) & (u < 1))) or np.any(~((v > 0) & (v < 1))):
        raise DomainError("density needs u, v in (0, 1)")
    x, y = _neg_log(u), _neg_log(v)
    total = x + y
    if np.any(~(total > 0)) or np.any(~np.isfinite(total)) or np.any(x == 0) or np.any(y == 0):
        raise DomainError("u * v is numerically 0 or 1")
    log_total = np.log(total)
    i = np.arange(a + 2, dtype=float)
    coeff = log_binom(a + 1, i) + gammaln(a + i) - gammaln(a + 1.0) - gammaln(float(a))
    terms = coeff[:, None] + (a + 1 - i)[:, None] * np.ravel(log_total)[None, :]
    peak = terms.max(axis=0)
    log_sum = (peak + np.log(np.exp(terms - peak).sum(axis=0))).reshape(np.shape(log_total))
    out = a * (np.log(x) + np.log(y)) - (2 * a + 1) * log_total + log_sum
    return out if out.ndim else float(out)


def density_singular_int(a: int, u, v):
    """Diagonal-dominant bivariate Gamma copula density, closed form.

    Valid for integer ``a``; evaluated in log space so that the corner
    ``u, v -> 1``, where numerator and denominator both vanish, stays
    accurate.
    """
    return np.exp(log_density_singular_int(a, u, v))


def density_singular_quad(a: float, u: float, v: float, rel_tol: float = 1e-11) -> float:
    """Diagonal-dominant density by quadrature over the latent variable.

    Integrates ``alpha(s) f(s, u) f(s, v)`` over ``s > 0`` directly from
    the component densities, so it also covers non-integer ``a``.
    """
    _check_shape(a)
    if not (0 < u < 1 and 0 < v < 1):
        raise DomainError("density needs u, v in (0, 1)")
    x, y = float(_neg_log(u)), float(_neg_log(v))
    total = x + y
    log_const = np.log(a) + a * (np.log(x) + np.log(y)) - 2 * gammaln(a + 1.0)

    def integrand(sigma):
        # s = sigma / total puts the bulk of the mass at sigma = O(a).
        s = sigma / total
        log_alpha = (a - 1) * np.log(s) - (a + 1) * np.log1p(s)
        log_ff = 2 * (a + 1) * np.log1p(s) - s * total
        with np.errstate(divide="ignore"):
            return np.exp(log_const + log_alpha + log_ff) / total

    return quad_semi_infinite(integrand, 0.0, rel_tol=rel_tol, abs_tol=1e-300)
