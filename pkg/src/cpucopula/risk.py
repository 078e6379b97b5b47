"""Aggregate-loss simulation and Value-at-Risk.

Copula samples are mapped through lognormal marginal quantiles and summed
per scenario. ``VaR_u(S)`` is the empirical ``(1 - u)``-quantile of the
aggregate with linear interpolation between order statistics (type 7).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from cpucopula.batch import SampleBatch
from cpucopula.errors import DomainError

SECTIONS = 20


@dataclass(frozen=True)
class LognormalMarginal:
    """Lognormal law with log-mean ``mu`` and log-standard deviation ``sigma``."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0 or not math.isfinite(self.mu):
            raise DomainError(f"invalid lognormal parameters mu={self.mu}, sigma={self.sigma}")

    def quantile(self, p):
        return np.exp(self.mu + self.sigma * ndtri(p))

    @property
    def mean(self) -> float:
        return math.exp(self.mu + 0.5 * self.sigma**2)


def fit_lognormal(losses) -> LognormalMarginal:
    """Log-moment fit: mean and ``n - 1`` standard deviation of the log losses."""
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 1 or losses.size < 2:
        raise DomainError("need a column of at least two losses")
    if np.any(~(losses > 0)):
        raise DomainError("losses must be strictly positive")
    logs = np.log(losses)
    sigma = float(np.std(logs, ddof=1))
    if sigma == 0:
        raise DomainError("log losses have zero variance")
    return LognormalMarginal(float(np.mean(logs)), sigma)


@dataclass(frozen=True)
class VaRReport:
    """VaR per level with a batch-means Monte Carlo standard error."""

    levels: list
    var: list
    std_err: list
    n_sims: int
    copula_label: str
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "copula": self.copula_label,
            "n_sims": self.n_sims,
            "rows": [
                {"level": u, "var": v, "std_err": e}
                for u, v, e in zip(self.levels, self.var, self.std_err)
            ],
            **self.extra,
        }


def losses_from_copula(values, marginals) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim != 2 or values.shape[1] != len(marginals):
        raise DomainError(
            f"copula batch has shape {values.shape} but {len(marginals)} marginals were given")
    out = np.empty_like(values)
    for k, marginal in enumerate(marginals):
        out[:, k] = marginal.quantile(values[:, k])
    return out


def value_at_risk(aggregate, u):
    """``VaR_u = Q(1 - u)`` of the aggregate, type-7 interpolation."""
    return np.quantile(np.asarray(aggregate, dtype=float), 1.0 - np.asarray(u, dtype=float), method="linear")


def aggregate_var(copula_batch, marginals, levels, copula_label: str = "",
                  sections: int = SECTIONS) -> VaRReport:
    """VaR of ``S = sum_k Q_k(V_k)`` at each level ``u`` in ``(0, 0.5)``.

    The standard error is the spread of the VaR over ``sections`` contiguous
    sub-batches divided by ``sqrt(sections)``.
    """
    values = copula_batch.values if isinstance(copula_batch, SampleBatch) else copula_batch
    levels = [float(u) for u in levels]
    if any(not 0 < u < 0.5 for u in levels):
        raise DomainError("VaR levels must lie in (0, 0.5)")
    aggregate = losses_from_copula(values, marginals).sum(axis=1)
    n = aggregate.size
    var = np.atleast_1d(value_at_risk(aggregate, levels))
    if n >= 2 * sections:
        per_section = np.array([np.atleast_1d(value_at_risk(part, levels))
                                for part in np.array_split(aggregate, sections)])
        std_err = per_section.std(axis=0, ddof=1) / math.sqrt(sections)
    else:
        std_err = np.full(len(levels), math.nan)
    return VaRReport(levels, [float(v) for v in var], [float(e) for e in std_err], n, copula_label)
