"""Copula drivers: the dependence injected into the latent step.

Patchwork drivers place a Gaussian copula inside each grid cell picked out by
an observed rank vector, so their samples stay close to the empirical copula
of the data. The rook, upper-Frechet (UF) and lower-Frechet (LF) drivers use
the independent, all-ones and ``[[1, -1], [-1, 1]]`` cell correlations.
Plain Gaussian and Student-t copulas serve as parametric baselines.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, stdtr

from cpucopula.batch import SampleBatch, to_open_unit
from cpucopula.errors import DegenerateColumnError, DomainError, SpecError
from cpucopula.numerics import RandomSource, psd_factor, sample_chi_square, validate_correlation

logger = logging.getLogger(__name__)

PATCHWORK = "patchwork"
ROOK = "rook"
UPPER_FRECHET = "uf"
LOWER_FRECHET = "lf"
GAUSSIAN = "gaussian"
STUDENT_T = "t"

PATCHWORK_KINDS = (PATCHWORK, ROOK, UPPER_FRECHET, LOWER_FRECHET)
KINDS = PATCHWORK_KINDS + (GAUSSIAN, STUDENT_T)


@dataclass(frozen=True)
class RankData:
    """Column-wise ranks of an ``n x d`` observation matrix (values 1..n)."""

    ranks: np.ndarray

    def __post_init__(self):
        ranks = np.array(self.ranks, dtype=np.int64)
        if ranks.ndim != 2 or ranks.shape[0] < 1:
            raise DomainError(f"ranks must be a nonempty 2-d array, got shape {ranks.shape}")
        expected = np.arange(1, ranks.shape[0] + 1)
        for k in range(ranks.shape[1]):
            if not np.array_equal(np.sort(ranks[:, k]), expected):
                raise DomainError(f"rank column {k + 1} is not a permutation of 1..n")
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)

    @property
    def n(self) -> int:
        return self.ranks.shape[0]

    @property
    def d(self) -> int:
        return self.ranks.shape[1]


def ranks_from_data(observations) -> RankData:
    """Rank each column of ``observations``.

    Ties are broken by order of first occurrence, so the earlier row gets
    the smaller rank; a warning is logged when that happens.

    Raises
    ------
    DomainError
        Fewer than two rows or NaN entries.
    DegenerateColumnError
        A constant column.
    """
    data = np.asarray(observations, dtype=float)
    if data.ndim == 1:
        data = data[:, None]
    if data.ndim != 2 or data.shape[0] < 2:
        raise DomainError("need at least two observations to rank")
    if np.isnan(data).any():
        raise DomainError("observations contain NaN")
    n, d = data.shape
    ranks = np.empty((n, d), dtype=np.int64)
    for k in range(d):
        column = data[:, k]
        if np.all(column == column[0]):
            raise DegenerateColumnError(f"column {k + 1} is constant")
        if np.unique(column).size < n:
            logger.warning("column %d has ties; broken by first occurrence", k + 1)
        order = np.argsort(column, kind="stable")
        ranks[order, k] = np.arange(1, n + 1)
    return RankData(ranks)


def patchwork_correlation(d: int, rho: float) -> np.ndarray:
    """Equicorrelation matrix ``(1 - rho) I + rho 11^T`` used in every cell."""
    m = np.full((d, d), float(rho))
    np.fill_diagonal(m, 1.0)
    return m


@dataclass(frozen=True)
class DriverSpec:
    """Tagged description of a copula driver.

    Use the classmethod constructors rather than filling fields by hand.
    """

    kind: str
    ranks: RankData | None = None
    rho: float | None = None
    corr: np.ndarray | None = None
    dof: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"unknown driver kind {self.kind!r}")
        if self.kind in PATCHWORK_KINDS:
            if self.ranks is None:
                raise SpecError(f"{self.kind} driver needs rank data")
            if self.kind == LOWER_FRECHET and self.ranks.d != 2:
                raise SpecError("the LF driver is only defined in two dimensions")
            if self.rho is None or not -1.0 <= self.rho <= 1.0:
                raise SpecError(f"cell correlation must lie in [-1, 1], got {self.rho}")
        else:
            if self.corr is None:
                raise SpecError(f"{self.kind} driver needs a correlation matrix")
            try:
                object.__setattr__(self, "corr", validate_correlation(self.corr))
            except DomainError as exc:
                raise SpecError(f"invalid correlation matrix: {exc}") from exc
            if self.kind == STUDENT_T and (self.dof is None or not self.dof > 0):
                raise SpecError(f"t driver needs positive degrees of freedom, got {self.dof}")

    @classmethod
    def rook(cls, ranks: RankData) -> "DriverSpec":
        return cls(ROOK, ranks=ranks, rho=0.0)

    @classmethod
    def upper_frechet(cls, ranks: RankData) -> "DriverSpec":
        return cls(UPPER_FRECHET, ranks=ranks, rho=1.0)

    @classmethod
    def lower_frechet(cls, ranks: RankData) -> "DriverSpec":
        return cls(LOWER_FRECHET, ranks=ranks, rho=-1.0)

    @classmethod
    def patchwork(cls, ranks: RankData, rho: float) -> "DriverSpec":
        return cls(PATCHWORK, ranks=ranks, rho=float(rho))

    @classmethod
    def gaussian(cls, corr) -> "DriverSpec":
        return cls(GAUSSIAN, corr=np.asarray(corr, dtype=float))

    @classmethod
    def student_t(cls, corr, dof: float) -> "DriverSpec":
        return cls(STUDENT_T, corr=np.asarray(corr, dtype=float), dof=float(dof))

    @property
    def d(self) -> int:
        if self.ranks is not None:
            return self.ranks.d
        return self.corr.shape[0]

    def cell_correlation(self) -> np.ndarray:
        if self.kind in PATCHWORK_KINDS:
            return patchwork_correlation(self.d, self.rho)
        return self.corr

    def describe(self) -> dict:
        """JSON-friendly summary for metadata records."""
        out = {"kind": self.kind, "d": self.d}
        if self.kind in PATCHWORK_KINDS:
            out["n_cells"] = self.ranks.n
            out["rho"] = self.rho
        if self.kind == STUDENT_T:
            out["dof"] = self.dof
        return out


def t_cdf(x, dof: float):
    """Univariate Student-t CDF; closed form for two degrees of freedom."""
    x = np.asarray(x, dtype=float)
    if dof == 2:
        root = np.sqrt(2.0 + x * x)
        # 1/(r (r - x)) is the cancellation-free form of (1 + x/r)/2 for x < 0.
        lower_tail = 1.0 / (root * (root + np.abs(x)))
        return np.where(x < 0, lower_tail, 1.0 - lower_tail)
    return stdtr(dof, x)


def _correlated_normals(corr, count, rng):
    factor = psd_factor(corr)
    z = rng.generator.standard_normal((count, corr.shape[0]))
    return z @ factor.T


def sample_driver(spec: DriverSpec, count: int, rng: RandomSource) -> SampleBatch:
    """Draw ``count`` points from the driver copula.

    Patchwork kinds pick a cell ``J`` uniformly among the observations, draw
    ``Y`` from the cell's Gaussian copula and return ``(Y + r_J - 1) / n``.
    The drawn cell indices are kept in ``SampleBatch.cells``.
    """
    if count < 0:
        raise DomainError("count must be nonnegative")
    d = spec.d
    meta = {"driver": spec.describe(), "seed": rng.seed, "stream_id": rng.stream_id}
    if count == 0:
        return SampleBatch(np.empty((0, d)), meta=meta)

    if spec.kind in PATCHWORK_KINDS:
        n = spec.ranks.n
        cells = rng.generator.integers(0, n, size=count)
        y = to_open_unit(ndtr(_correlated_normals(spec.cell_correlation(), count, rng)))
        values = (y + (spec.ranks.ranks[cells] - 1)) / n
        return SampleBatch(to_open_unit(values), cells=cells, meta=meta)

    x = _correlated_normals(spec.corr, count, rng)
    if spec.kind == GAUSSIAN:
        return SampleBatch(to_open_unit(ndtr(x)), meta=meta)
    chi2 = sample_chi_square(spec.dof, rng, size=count)
    x = x / np.sqrt(chi2 / spec.dof)[:, None]
    return SampleBatch(to_open_unit(t_cdf(x, spec.dof)), meta=meta)


def empirical_correlations(observations, transform: str = "none") -> np.ndarray:
    """Pearson correlation matrix of the columns, optionally of their logs.

    Raises
    ------
    DomainError
        ``transform='log'`` with a nonpositive entry, or an unknown transform.
    DegenerateColumnError
        A zero-variance column.
    """
    data = np.asarray(observations, dtype=float)
    if data.ndim != 2 or data.shape[0] < 2:
        raise DomainError("need an n x d matrix with n >= 2")
    if transform == "log":
        if np.any(data <= 0):
            raise DomainError("log transform needs strictly positive observations")
        data = np.log(data)
    elif transform != "none":
        raise DomainError(f"unknown transform {transform!r}")
    centered = data - data.mean(axis=0)
    scale = np.sqrt((centered**2).sum(axis=0))
    if np.any(scale == 0):
        column = int(np.flatnonzero(scale == 0)[0]) + 1
        raise DegenerateColumnError(f"column {column} has zero variance")
    unit = centered / scale
    corr = unit.T @ unit
    corr = 0.5 * (corr + corr.T)
    np.fill_diagonal(corr, 1.0)
    return corr
