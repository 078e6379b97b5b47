"""Shared numerical kernels.

Random streams, the integer-shape Gamma CDF, exact binomials, adaptive
Gauss-Kronrod quadrature and a factorization for positive semidefinite
correlation matrices.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from cpucopula.errors import DomainError, NotPSDError, QuadratureError

_UINT64_MAX = 2**64 - 1

PSD_TOL = 1e-10
MAX_PANELS = 2**16


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------


@dataclass
class RandomSource:
    """A reproducible random stream identified by ``(seed, stream_id)``.

    The stream is a PCG64DXSM generator keyed by a ``SeedSequence`` whose
    spawn key is the stream id, so distinct ids give independent streams and
    the same pair always gives the same draws. Draws advance the stream.
    """

    seed: int
    stream_id: int = 0
    _generator: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        for name in ("seed", "stream_id"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or not 0 <= value <= _UINT64_MAX:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value!r}")
        sequence = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream_id),))
        self._generator = np.random.Generator(np.random.PCG64DXSM(sequence))

    @property
    def generator(self) -> np.random.Generator:
        return self._generator

    def stream(self, stream_id: int) -> "RandomSource":
        """Fresh source with the same seed and another stream id."""
        return RandomSource(self.seed, stream_id)


def sample_std_normal(rng: RandomSource, size) -> np.ndarray:
    return rng.generator.standard_normal(size)


def sample_gamma(shape, rate, rng: RandomSource, size=None) -> np.ndarray:
    """Gamma draws with the given shape and rate (mean ``shape / rate``).

    ``shape`` and ``rate`` broadcast against each other and may be
    non-integer.
    """
    shape = np.asarray(shape, dtype=float)
    rate = np.asarray(rate, dtype=float)
    if np.any(~(shape > 0)) or np.any(~(rate > 0)):
        raise DomainError("gamma shape and rate must be strictly positive")
    return rng.generator.gamma(shape, 1.0 / rate, size=size)


def sample_chi_square(dof, rng: RandomSource, size=None) -> np.ndarray:
    if not dof > 0:
        raise DomainError(f"chi-square degrees of freedom must be positive, got {dof}")
    return rng.generator.chisquare(dof, size=size)


# ---------------------------------------------------------------------------
# Special functions
# ---------------------------------------------------------------------------


def binom(n: int, k: int) -> int:
    """Exact binomial coefficient; ``k > n`` returns 0 by convention."""
    if n < 0 or k < 0:
        raise DomainError(f"binom needs nonnegative arguments, got ({n}, {k})")
    return math.comb(n, k)


def log_binom(n, k):
    """``log C(n, k)`` for real arguments, for density evaluation."""
    return gammaln(np.add(n, 1.0)) - gammaln(np.add(k, 1.0)) - gammaln(np.subtract(n, k) + 1.0)


def gamma_cdf_int(a: int, x):
    """Distribution function of the standard Gamma law with integer shape.

    ``F_a(x) = 1 - exp(-x) * sum_{k<a} x**k / k!``. Below ``x = a + 1`` the
    equivalent upper series ``exp(-x) * sum_{k>=a} x**k / k!`` is summed
    instead, which keeps full relative accuracy as ``x -> 0`` where the
    direct form cancels. Accepts scalars or arrays.
    """
    if int(a) != a or a < 1:
        raise DomainError(f"shape must be a positive integer, got {a}")
    a = int(a)
    x_arr = np.asarray(x, dtype=float)
    if np.any(x_arr < 0) or np.any(np.isnan(x_arr)):
        raise DomainError("gamma_cdf_int needs x >= 0")
    out = np.zeros_like(x_arr)

    low = (x_arr > 0) & (x_arr < a + 1)
    if np.any(low):
        xl = x_arr[low]
        term = np.ones_like(xl)
        total = np.ones_like(xl)
        for j in range(1, 2000):
            term = term * xl / (a + j)
            total += term
            if np.all(term <= 1e-17 * total):
                break
        out[low] = np.exp(a * np.log(xl) - xl - gammaln(a + 1.0)) * total

    high = x_arr >= a + 1
    if np.any(high):
        xh = x_arr[high]
        k = np.arange(a, dtype=float)
        log_terms = k[:, None] * np.log(xh)[None, :] - gammaln(k + 1.0)[:, None]
        peak = log_terms.max(axis=0)
        log_head = peak + np.log(np.exp(log_terms - peak).sum(axis=0))
        out[high] = 1.0 - np.exp(log_head - xh)

    out = np.clip(out, 0.0, 1.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

# Gauss-Kronrod 7/15 abscissae and weights on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
_GAUSS = np.zeros(15)
_GAUSS[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate([_WG[:-1], _WG[::-1]])


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    values = np.asarray(f(0.5 * (hi + lo) + half * _NODES), dtype=float)
    kronrod = half * np.dot(_KRONROD, values)
    gauss = half * np.dot(_GAUSS, values)
    if not np.isfinite(kronrod):
        raise QuadratureError("integrand is not finite on [%r, %r]" % (lo, hi), kronrod, math.inf)
    return kronrod, abs(kronrod - gauss)


def quad(f, lower: float, upper: float, rel_tol: float = 1e-10, abs_tol: float = 0.0,
         max_panels: int = MAX_PANELS, initial_panels: int = 8) -> float:
    """Globally adaptive Gauss-Kronrod (7/15) quadrature on a finite interval.

    ``f`` must accept a 1-d array of abscissae. Panels with the largest
    ``|K15 - G7|`` are bisected until the summed error is below
    ``max(rel_tol * |I|, abs_tol)``.

    Raises
    ------
    QuadratureError
        If ``max_panels`` is reached first; the partial estimate is attached.
    """
    if not upper > lower:
        raise DomainError("quad needs upper > lower")
    edges = np.linspace(lower, upper, initial_panels + 1)
    heap = []
    done = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        value, err = _gk15(f, lo, hi)
        heap.append((-err, lo, hi, value))
    heapq.heapify(heap)
    total = math.fsum(item[3] for item in heap)
    total_err = math.fsum(-item[0] for item in heap)
    panels = initial_panels
    while heap and total_err > max(rel_tol * abs(total), abs_tol):
        if panels >= max_panels:
            raise QuadratureError(
                f"no convergence after {panels} panels (estimate {total!r}, error {total_err:.3g})",
                total, total_err)
        neg_err, lo, hi, value = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if (hi - lo) <= 64 * np.finfo(float).eps * max(abs(lo), abs(hi), 1e-300):
            # Too narrow to split; keep it at its current error.
            done.append((neg_err, lo, hi, value))
            continue
        left, left_err = _gk15(f, lo, mid)
        right, right_err = _gk15(f, mid, hi)
        heapq.heappush(heap, (-left_err, lo, mid, left))
        heapq.heappush(heap, (-right_err, mid, hi, right))
        panels += 1
        total += left + right - value
        total_err += left_err + right_err + neg_err
        if panels % 256 == 0:
            total = math.fsum(item[3] for item in heap + done)
            total_err = math.fsum(-item[0] for item in heap + done)
    return math.fsum(item[3] for item in heap + done)


def quad_semi_infinite(f, lower: float = 0.0, rel_tol: float = 1e-10, abs_tol: float = 0.0,
                       max_panels: int = MAX_PANELS) -> float:
    """Integrate ``f`` over ``(lower, inf)``.

    The half line is mapped to ``(0, 1)`` by ``z = lower + t / (1 - t)``;
    Kronrod nodes never touch either endpoint so ``f`` is not evaluated at
    ``lower`` or infinity.
    """
    if lower < 0:
        raise DomainError("lower limit must be nonnegative")
    if not 1e-12 < rel_tol < 1e-2:
        raise DomainError(f"rel_tol must lie in (1e-12, 1e-2), got {rel_tol}")

    def mapped(t):
        one_minus = 1.0 - t
        z = lower + t / one_minus
        values = np.asarray(f(z), dtype=float) / (one_minus * one_minus)
        # f decays at infinity; 0 * inf from the Jacobian is taken as 0.
        return np.where(np.isnan(values) & ~np.isfinite(z), 0.0, values)

    return quad(mapped, 0.0, 1.0, rel_tol=rel_tol, abs_tol=abs_tol, max_panels=max_panels)


# ---------------------------------------------------------------------------
# Correlation matrices
# ---------------------------------------------------------------------------


def validate_correlation(m) -> np.ndarray:
    """Check symmetry, unit diagonal and PSD-ness; return a float copy."""
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DomainError(f"correlation matrix must be square, got shape {m.shape}")
    if not np.allclose(m, m.T, atol=1e-12, rtol=0):
        raise DomainError("correlation matrix is not symmetric")
    if not np.allclose(np.diag(m), 1.0, atol=1e-12, rtol=0):
        raise DomainError("correlation matrix needs a unit diagonal")
    smallest = float(np.linalg.eigvalsh(m).min())
    if smallest < -PSD_TOL:
        raise NotPSDError(f"matrix is not positive semidefinite (eigenvalue {smallest:.3e})")
    return m


def psd_factor(m) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == m`` for a PSD matrix.

    Runs a semidefinite Cholesky: a pivot that falls to ``PSD_TOL`` or below
    zeroes its column instead of failing. Unit-diagonal rank-1 matrices such
    as ``ones((d, d))`` or ``[[1, -1], [-1, 1]]`` factor into entries of
    exactly +-1 and 0, so the coupled coordinates come out bit-identical (or
    exactly negated). Falls back to an eigen factor made triangular by QR
    when rounding spoils the round trip.

    Raises
    ------
    NotPSDError
        When an eigenvalue is below ``-PSD_TOL``.
    """
    m = validate_correlation(m)
    d = m.shape[0]
    factor = np.zeros_like(m)
    for j in range(d):
        pivot = m[j, j] - np.dot(factor[j, :j], factor[j, :j])
        if pivot > PSD_TOL:
            root = math.sqrt(pivot)
            factor[j, j] = root
            factor[j + 1:, j] = (m[j + 1:, j] - factor[j + 1:, :j] @ factor[j, :j]) / root
    if np.max(np.abs(factor @ factor.T - m)) <= 1e-10:
        return factor

    values, vectors = np.linalg.eigh(m)
    half = vectors * np.sqrt(np.clip(values, 0.0, None))
    _, r = np.linalg.qr(half.T)
    lower = r.T
    signs = np.where(np.diag(lower) < 0, -1.0, 1.0)
    return lower * signs
