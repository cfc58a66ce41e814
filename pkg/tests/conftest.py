import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def ks_statistic(samples, cdf) -> float:
    """Kolmogorov-Smirnov distance between samples and a continuous CDF."""
    x = np.sort(np.asarray(samples))
    n = x.size
    f = cdf(x)
    upper = np.max(np.arange(1, n + 1) / n - f)
    lower = np.max(f - np.arange(0, n) / n)
    return float(max(upper, lower))
