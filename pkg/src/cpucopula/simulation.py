"""Family dispatch and chunked, stream-partitioned simulation."""

from __future__ import annotations

import numpy as np

from cpucopula import gamma_copula, power_copula
from cpucopula.batch import SampleBatch
from cpucopula.drivers import DriverSpec, sample_driver
from cpucopula.errors import SpecError
from cpucopula.numerics import RandomSource

# Fixed so that output never depends on the machine running it.
CHUNK_SIZE = 250_000

FAMILIES = ("gamma", "power", "driver")


def sample_copula(family: str, driver: DriverSpec, count: int, rng: RandomSource, params=None) -> SampleBatch:
    """Draw one batch from ``family`` using a single stream.

    ``family='driver'`` samples the driver copula itself (the Gaussian and t
    baselines, or a bare patchwork copula).
    """
    if family == "gamma":
        return gamma_copula.sample(params, driver, count, rng)
    if family == "power":
        return power_copula.sample(params, driver, count, rng)
    if family == "driver":
        return sample_driver(driver, count, rng)
    raise SpecError(f"unknown copula family {family!r}")


def simulate(family: str, driver: DriverSpec, count: int, seed: int, params=None,
             chunk_size: int = CHUNK_SIZE, keep_latent: bool = True) -> SampleBatch:
    """Sample ``count`` points in chunks, chunk ``i`` drawing from stream ``i``.

    Chunks are concatenated in stream order, so the result depends only on
    ``(family, driver, params, count, seed, chunk_size)``.
    """
    if family == "power" and params is not None:
        # Tables are immutable; build once and share across chunks.
        tables = [power_copula.MarginalTable.build(b) for b in params.beta]
    pieces = []
    for stream_id, start in enumerate(range(0, max(count, 1), chunk_size)):
        size = min(chunk_size, count - start)
        rng = RandomSource(seed, stream_id)
        if family == "power":
            pieces.append(power_copula.sample(params, driver, size, rng, tables=tables))
        else:
            pieces.append(sample_copula(family, driver, size, rng, params))
    first = pieces[0]
    latent = None
    if keep_latent and first.latent is not None:
        latent = np.concatenate([p.latent for p in pieces])
    cells = np.concatenate([p.cells for p in pieces]) if first.cells is not None else None
    meta = dict(first.meta, seed=seed, n_streams=len(pieces), chunk_size=chunk_size)
    meta.pop("stream_id", None)
    return SampleBatch(np.concatenate([p.values for p in pieces]), latent=latent, cells=cells, meta=meta)
