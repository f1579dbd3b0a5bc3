import numpy as np
import pytest

from exwalk import ThresholdLadder


def random_ladder(rng, n_max=50, l_max=4, strict=True):
    """Draw a valid ladder with well-separated probabilities."""
    n = int(rng.integers(2, n_max + 1))
    l = int(rng.integers(0, min(l_max, n) + 1))
    thresholds = tuple(
        sorted(rng.choice(np.arange(1, n + 1), size=l, replace=False).tolist())
    )
    if l == 0:
        probs = (float(rng.uniform(0.05, 0.95)),)
    else:
        # evenly spread probabilities keep strict ordering numerically robust
        lo = float(rng.uniform(0.02, 0.4))
        hi = float(rng.uniform(lo + 0.05 * (l + 1), min(0.98, lo + 0.9)))
        probs = tuple(float(x) for x in np.linspace(lo, hi, l + 1))
    return ThresholdLadder(N=n, M=thresholds, p=probs, strict=strict)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
