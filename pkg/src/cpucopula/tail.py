"""Tail dependence: exact identities, analytic and numerical coefficients.

The diagonal-dominant Gamma copula shares its upper tail with the negative
binomial partition-of-unity copula; for integer shape ``a`` the coefficient
is ``1 - C(2a, a) / 4**a``. The Power copula has none. Empirical estimates
at a finite threshold come from joint exceedance counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from cpucopula.batch import SampleBatch
from cpucopula.errors import DomainError, EvaluationError
from cpucopula.gamma_copula import log_density_singular_int
from cpucopula.numerics import binom, gamma_cdf_int, log_binom, quad_semi_infinite

LEMMA_MAX_M = 30
LOW_COUNT = 50


def _check_integer_shape(a):
    if int(a) != a or a < 1:
        raise DomainError(f"a must be a positive integer, got {a}")
    return int(a)


def log_nb_density(a: int, u, v):
    a = _check_integer_shape(a)
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if np.any(~((u > 0) & (u < 1))) or np.any(~((v > 0) & (v < 1))):
        raise DomainError("density needs u, v in (0, 1)")
    hu, hv = 1.0 - u, 1.0 - v
    # 1 - uv written through the complements keeps digits when u, v -> 1.
    one_minus_uv = hu + hv - hu * hv
    log_uv = np.log(u) + np.log(v)
    i = np.arange(a, dtype=float)
    terms = (log_binom(a - 1, i) + log_binom(a + 1, i))[:, None] + i[:, None] * np.ravel(log_uv)[None, :]
    peak = terms.max(axis=0)
    log_sum = (peak + np.log(np.exp(terms - peak).sum(axis=0))).reshape(np.shape(log_uv))
    out = math.log(a + 1) + a * (np.log(hu) + np.log(hv)) - (2 * a + 1) * np.log(one_minus_uv) + log_sum
    return out if out.ndim else float(out)


def nb_density(a: int, u, v):
    """Diagonal-dominant negative binomial copula density.

    ``(a+1) ((1-u)(1-v))**a / (1-uv)**(2a+1) * sum_i C(a-1,i) C(a+1,i) (uv)**i``
    """
    return np.exp(log_nb_density(a, u, v))


def ratio_nb_gamma(a: int, u, v):
    """Ratio of the negative binomial to the Gamma copula density, via logs."""
    log_ratio = log_nb_density(a, u, v) - log_density_singular_int(a, u, v)
    if not np.all(np.isfinite(log_ratio)):
        raise EvaluationError("density ratio under- or overflowed")
    return np.exp(log_ratio)


def vandermonde_sides(a: int) -> tuple[int, int]:
    """Both sides of ``sum_i C(a+1, i) C(a-1, a-1-i) = C(2a, a-1)``."""
    a = _check_integer_shape(a)
    lhs = sum(binom(a + 1, i) * binom(a - 1, a - 1 - i) for i in range(a))
    return lhs, binom(2 * a, a - 1)


def tail_limit_constant(a: int) -> Fraction:
    """Limit of the density ratio at ``(1, 1)`` as an exact rational.

    ``(a + 1) * sum_i C(a-1, i) C(a+1, i) * a! (a-1)! / (2a)!``; equal to one.
    """
    a = _check_integer_shape(a)
    total = sum(binom(a - 1, i) * binom(a + 1, i) for i in range(a))
    return Fraction((a + 1) * total * math.factorial(a) * math.factorial(a - 1), math.factorial(2 * a))


def lemma_identity(m: int) -> tuple[Fraction, Fraction]:
    """Both sides of ``sum_{k<=m} C(m+k-1, k) / 2**k = (C(2m, m) + 4**m) / 2**(m+1)``.

    Exact rationals; the sides must agree for every positive ``m``.
    """
    if int(m) != m or not 1 <= m <= LEMMA_MAX_M:
        raise DomainError(f"m must be an integer in 1..{LEMMA_MAX_M}, got {m}")
    m = int(m)
    lhs = sum(Fraction(binom(m + k - 1, k), 2**k) for k in range(m + 1))
    rhs = Fraction(binom(2 * m, m) + 4**m, 2 ** (m + 1))
    return lhs, rhs


def lambda_u_gamma_exact(a: int) -> Fraction:
    a = _check_integer_shape(a)
    return 1 - Fraction(binom(2 * a, a), 4**a)


def lambda_u_gamma_analytic(a: int) -> float:
    """Upper tail dependence of the diagonal-dominant Gamma copula, ``1 - C(2a,a)/4**a``."""
    return float(lambda_u_gamma_exact(a))


def lambda_u_integrand(a: int, z):
    """``a F_{a+1}(z)**2 / z**2``; finite at small ``z`` where it behaves like ``z**(2a)``."""
    a = _check_integer_shape(a)
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 0, z, 1.0)
    value = a * (gamma_cdf_int(a + 1, safe) / safe) ** 2
    return np.where(z > 0, value, 0.0)


def lambda_u_gamma_quadrature(a: int, rel_tol: float = 1e-11) -> float:
    """Upper tail dependence from its integral representation over ``(0, inf)``."""
    a = _check_integer_shape(a)
    return quad_semi_infinite(lambda z: lambda_u_integrand(a, z), 0.0, rel_tol=rel_tol)


@dataclass(frozen=True)
class TailEstimate:
    """Finite-threshold tail dependence estimate.

    ``value`` is the joint exceedance count over the expected marginal
    exceedance count; ``std_err`` is the binomial standard error scaled the
    same way. ``warning`` is set when fewer than 50 marginal exceedances are
    expected.
    """

    threshold: float
    side: str
    value: float
    std_err: float
    sample_count: int
    joint_count: int
    warning: str | None = None


def empirical_tail(batch, dims=(0, 1), t: float = 0.99, side: str = "upper") -> TailEstimate:
    """Plug-in tail dependence estimate at threshold ``t``.

    Upper side (``0.5 < t < 1``) counts ``V_j > t and V_k > t`` and divides by
    ``N (1 - t)``. Lower side (``0 < t < 0.5``) counts ``V_j <= t and V_k <= t``
    and divides by ``N t``.
    """
    values = batch.values if isinstance(batch, SampleBatch) else np.asarray(batch)
    j, k = dims
    n = values.shape[0]
    if side == "upper":
        if not 0.5 < t < 1:
            raise DomainError("upper threshold must lie in (0.5, 1)")
        joint = int(np.count_nonzero((values[:, j] > t) & (values[:, k] > t)))
        mass = 1.0 - t
    elif side == "lower":
        if not 0 < t < 0.5:
            raise DomainError("lower threshold must lie in (0, 0.5)")
        joint = int(np.count_nonzero((values[:, j] <= t) & (values[:, k] <= t)))
        mass = t
    else:
        raise DomainError(f"side must be 'upper' or 'lower', got {side!r}")
    if n == 0:
        raise DomainError("empty batch")
    p_hat = joint / n
    warning = None
    if n * mass < LOW_COUNT:
        warning = f"only {n * mass:.1f} marginal exceedances expected; estimate is noisy"
    return TailEstimate(
        threshold=t,
        side=side,
        value=p_hat / mass,
        std_err=math.sqrt(p_hat * (1.0 - p_hat) / n) / mass,
        sample_count=n,
        joint_count=joint,
        warning=warning,
    )


def combine_tail_estimates(estimates) -> TailEstimate:
    """Pool estimates from partitioned batches (same threshold and side)."""
    estimates = list(estimates)
    if not estimates:
        raise DomainError("nothing to combine")
    t, side = estimates[0].threshold, estimates[0].side
    if any(e.threshold != t or e.side != side for e in estimates):
        raise DomainError("estimates differ in threshold or side")
    n = sum(e.sample_count for e in estimates)
    joint = sum(e.joint_count for e in estimates)
    mass = 1.0 - t if side == "upper" else t
    p_hat = joint / n
    warning = None
    if n * mass < LOW_COUNT:
        warning = f"only {n * mass:.1f} marginal exceedances expected; estimate is noisy"
    return TailEstimate(t, side, p_hat / mass, math.sqrt(p_hat * (1.0 - p_hat) / n) / mass, n, joint, warning)
