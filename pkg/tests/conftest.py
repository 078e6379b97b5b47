import numpy as np
import pytest

from cpucopula.datasets import load_dataset
from cpucopula.drivers import ranks_from_data


@pytest.fixture(scope="session")
def dataset_a():
    return load_dataset("A")


@pytest.fixture(scope="session")
def dataset_b():
    return load_dataset("B")


@pytest.fixture(scope="session")
def ranks_a(dataset_a):
    return ranks_from_data(dataset_a.data)


def ks_statistic(sample, cdf=None):
    """One-sample Kolmogorov-Smirnov distance to ``cdf`` (uniform by default)."""
    x = np.sort(np.asarray(sample))
    n = x.size
    f = x if cdf is None else cdf(x)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
