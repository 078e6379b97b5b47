"""Container for simulated copula samples."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Largest double below 1 and a tiny positive floor; samples are kept in the
# open unit cube so downstream quantile transforms stay finite.
UNIT_LOW = np.finfo(float).tiny
UNIT_HIGH = 1.0 - 2.0**-53


def to_open_unit(x):
    return np.clip(x, UNIT_LOW, UNIT_HIGH)


@dataclass(frozen=True)
class SampleBatch:
    """An ``n x d`` matrix of points in ``(0, 1)^d`` plus provenance.

    Attributes
    ----------
    values : ndarray
        The copula sample, one row per draw.
    latent : ndarray or None
        Step-one latent draws ``S`` of a partition-of-unity sampler.
    cells : ndarray or None
        Zero-based index ``J`` of the observation cell, for patchwork drivers.
    meta : dict
        Seed, stream id, driver and parameter description.
    """

    values: np.ndarray
    latent: np.ndarray | None = None
    cells: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    def __len__(self):
        return self.n
