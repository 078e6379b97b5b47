"""Power partition-of-unity copula.

For shape ``beta > 2`` and latent ``s`` in ``(0, 1)`` a coordinate has the
piecewise power density

    f(s, u) = (beta - 2) ((1 - s) / (1 - u))**(beta - 1) / D(s),   u <= s
    f(s, u) = (beta - 2) (s / u)**(beta - 1) / D(s),               u >  s

with ``D(s) = 1 - s**(beta-1) - (1-s)**(beta-1)``. The latent law has the
distribution function :func:`power_A`, which has no closed-form inverse and
is inverted from a table.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cpucopula.batch import SampleBatch, to_open_unit
from cpucopula.drivers import DriverSpec, sample_driver
from cpucopula.errors import DomainError, SpecError
from cpucopula.numerics import RandomSource

LATENT_EPS = 1e-12
INVERSE_TOL = 1e-12


@dataclass(frozen=True)
class PowerParams:
    """Per-dimension shapes ``beta_1, ..., beta_d > 2``."""

    beta: tuple

    def __post_init__(self):
        beta = tuple(float(x) for x in np.atleast_1d(self.beta))
        if not beta or any(not x > 2 for x in beta):
            raise SpecError(f"Power shapes must exceed 2, got {beta}")
        object.__setattr__(self, "beta", beta)

    @property
    def d(self) -> int:
        return len(self.beta)


def _check_beta(beta):
    if not beta > 2:
        raise DomainError(f"beta must exceed 2, got {beta}")


def _pow_one_minus(s, p):
    """``(1 - s)**p`` via log1p."""
    with np.errstate(divide="ignore"):
        return np.exp(p * np.log1p(-s))


def _normalizer(beta, s):
    """``D(s) = 1 - s**(beta-1) - (1-s)**(beta-1)`` without cancellation at the ends."""
    s = np.asarray(s, dtype=float)
    p = beta - 1.0
    with np.errstate(divide="ignore"):
        left = -np.expm1(p * np.log1p(-s)) - s**p
        right = -np.expm1(p * np.log(s)) - _pow_one_minus(s, p)
    return np.where(s < 0.5, left, right)


def power_alpha(beta, s):
    """Latent density ``beta / (beta - 2) * D(s)`` on ``[0, 1]``."""
    _check_beta(beta)
    s = np.asarray(s, dtype=float)
    if np.any(~((s >= 0) & (s <= 1))):
        raise DomainError("power_alpha needs 0 <= s <= 1")
    return beta / (beta - 2.0) * _normalizer(beta, s)


def power_A(beta, s):
    """Latent distribution function ``((1-s)**b - s**b + b s - 1) / (b - 2)``."""
    _check_beta(beta)
    s = np.asarray(s, dtype=float)
    if np.any(~((s >= 0) & (s <= 1))):
        raise DomainError("power_A needs 0 <= s <= 1")
    # (1-s)**b - 1 + b s is evaluated as expm1 + b s to avoid cancellation near 0.
    with np.errstate(divide="ignore"):
        head = np.expm1(beta * np.log1p(-s)) + beta * s
    return np.clip((head - s**beta) / (beta - 2.0), 0.0, 1.0)


@dataclass(frozen=True)
class MarginalTable:
    """Tabulated latent distribution function on a uniform ``s`` grid."""

    beta: float
    grid: np.ndarray = field(repr=False)
    cdf: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, beta: float, points: int = 4097) -> "MarginalTable":
        _check_beta(beta)
        if points < 3:
            raise DomainError("table needs at least 3 points")
        grid = np.linspace(0.0, 1.0, points)
        cdf = power_A(beta, grid)
        cdf[0], cdf[-1] = 0.0, 1.0
        if np.any(np.diff(cdf) <= 0):
            raise DomainError("tabulated distribution function is not strictly increasing")
        grid.setflags(write=False)
        cdf.setflags(write=False)
        return cls(float(beta), grid, cdf)


def power_A_inverse(table: MarginalTable, u, tol: float = INVERSE_TOL, max_iter: int = 100):
    """Invert the latent distribution function.

    The table brackets each target; a safeguarded Newton iteration (bisection
    whenever a step leaves the bracket) then refines until
    ``|power_A(s) - u| <= tol``.
    """
    u = np.asarray(u, dtype=float)
    if np.any(~((u > 0) & (u < 1))):
        raise DomainError("power_A_inverse needs 0 < u < 1")
    beta = table.beta
    flat = np.ravel(u)
    idx = np.clip(np.searchsorted(table.cdf, flat, side="right") - 1, 0, table.grid.size - 2)
    lo = table.grid[idx].copy()
    hi = table.grid[idx + 1].copy()
    span = table.cdf[idx + 1] - table.cdf[idx]
    s = lo + (hi - lo) * (flat - table.cdf[idx]) / span
    for _ in range(max_iter):
        resid = power_A(beta, s) - flat
        if np.all(np.abs(resid) <= tol):
            break
        lo = np.where(resid < 0, s, lo)
        hi = np.where(resid > 0, s, hi)
        slope = power_alpha(beta, s)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = s - resid / slope
        inside = (step > lo) & (step < hi) & np.isfinite(step)
        s = np.where(np.abs(resid) <= tol, s, np.where(inside, step, 0.5 * (lo + hi)))
    else:
        raise DomainError("tabular inversion did not converge")
    return s.reshape(u.shape) if u.ndim else float(s[0])


def _clamp_latent(s):
    return np.clip(s, LATENT_EPS, 1.0 - LATENT_EPS)


def _check_latent(s):
    s = np.asarray(s, dtype=float)
    if np.any(~((s > 0) & (s < 1))):
        raise DomainError("latent s must lie strictly inside (0, 1)")
    return s


def power_f(beta, s, u):
    """Conditional density of a coordinate given latent ``s``."""
    _check_beta(beta)
    s = _check_latent(s)
    u = np.asarray(u, dtype=float)
    p = beta - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        below = ((1.0 - s) / (1.0 - u)) ** p
        above = (s / u) ** p
    return (beta - 2.0) * np.where(u <= s, below, above) / _normalizer(beta, s)


def power_split(beta, s):
    """Conditional CDF at ``u = s``: ``(1 - (1-s)**(b-1) - s) / D(s)``."""
    _check_beta(beta)
    s = _check_latent(s)
    p = beta - 1.0
    return ((1.0 - s) - _pow_one_minus(s, p)) / _normalizer(beta, s)


def power_F(beta, s, u):
    """Conditional distribution function of a coordinate given latent ``s``.

    Raises
    ------
    DomainError
        ``s`` at 0 or 1, where the normalizer vanishes.
    """
    _check_beta(beta)
    s = _check_latent(s)
    u = np.asarray(u, dtype=float)
    if np.any(~((u >= 0) & (u <= 1))):
        raise DomainError("power_F needs 0 <= u <= 1")
    p = beta - 1.0
    norm = _normalizer(beta, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        # u <= s: (1-s)**p ((1-u)**(2-b) - 1) / D
        below = _pow_one_minus(s, p) * np.expm1((2.0 - beta) * np.log1p(-u)) / norm
        # u > s: 1 - s**p (u**(2-b) - 1) / D
        above = 1.0 - s**p * np.expm1((2.0 - beta) * np.log(u)) / norm
    out = np.where(u <= s, below, above)
    out = np.where(u == 1.0, 1.0, np.where(u == 0.0, 0.0, out))
    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


def power_Q(beta, s, p):
    """Conditional quantile: inverse of :func:`power_F` in its second argument.

    Both branches are written as ratios of positive terms::

        p <= split:  1 - [(1-s)**(b-1) / ((1-s)**(b-1) + p D)]**(1/(b-2))
        p >  split:      [s**(b-1) / (s**(b-1) + (1-p) D)]**(1/(b-2))
    """
    _check_beta(beta)
    s = _check_latent(s)
    p = np.asarray(p, dtype=float)
    if np.any(~((p > 0) & (p < 1))):
        raise DomainError("power_Q needs 0 < p < 1")
    q = beta - 1.0
    r = 1.0 / (beta - 2.0)
    norm = _normalizer(beta, s)
    tail_left = _pow_one_minus(s, q)
    tail_right = s**q
    with np.errstate(divide="ignore", invalid="ignore"):
        below = -np.expm1(-r * np.log1p(p * norm / tail_left))
        above = np.exp(-r * np.log1p((1.0 - p) * norm / tail_right))
    out = np.where(p <= power_split(beta, s), below, above)
    return out if out.ndim else float(out)


def sample(params: PowerParams, driver: DriverSpec, count: int, rng: RandomSource,
           tables: list[MarginalTable] | None = None) -> SampleBatch:
    """Two-step sampler: ``S = A^-1(U)`` from the driver, then ``V = Q(S, W)``.

    ``W`` are fresh independent uniforms. Latents are clamped into
    ``[1e-12, 1 - 1e-12]`` because the conditional law degenerates at the
    ends of the unit interval.
    """
    if driver.d != params.d:
        raise SpecError(f"driver has dimension {driver.d}, parameters have {params.d}")
    driven = sample_driver(driver, count, rng)
    meta = dict(driven.meta, copula="power", beta=list(params.beta))
    if count == 0:
        return SampleBatch(driven.values, latent=driven.values.copy(), cells=driven.cells, meta=meta)
    if tables is None:
        tables = [MarginalTable.build(b) for b in params.beta]
    latent = np.empty_like(driven.values)
    for k, table in enumerate(tables):
        latent[:, k] = power_A_inverse(table, driven.values[:, k])
    latent = _clamp_latent(latent)
    w = to_open_unit(rng.generator.random(driven.values.shape))
    values = np.empty_like(latent)
    for k, beta in enumerate(params.beta):
        values[:, k] = power_Q(beta, latent[:, k], w[:, k])
    return SampleBatch(to_open_unit(values), latent=latent, cells=driven.cells, meta=meta)
