"""Small numeric helpers shared by the exact and asymptotic evaluators."""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln


def log_binom(n: int, j) -> np.ndarray:
    """log C(n, j), vectorized over j, via log-Gamma differences."""
    j = np.asarray(j, dtype=np.float64)
    return gammaln(n + 1.0) - gammaln(j + 1.0) - gammaln(n - j + 1.0)


def xlogx(x: float) -> float:
    """x * log(x) with the continuous-extension convention 0*log(0) = 0."""
    return 0.0 if x == 0.0 else x * math.log(x)


def logit(p: float) -> float:
    """log(p / (1 - p)), accurate near both endpoints."""
    return math.log(p) - math.log1p(-p)


class StreamLogSum:
    """Running log-sum-exp accumulator for chunked evaluation.

    Keeps (max, scaled sum) so arbitrarily many chunks can be merged
    without ever leaving log space.
    """

    __slots__ = ("log_max", "scaled")

    def __init__(self):
        self.log_max = -math.inf
        self.scaled = 0.0

    def add(self, log_terms: np.ndarray) -> None:
        if log_terms.size == 0:
            return
        m = float(np.max(log_terms))
        if m == -math.inf:
            return
        if m > self.log_max:
            self.scaled = self.scaled * math.exp(self.log_max - m) + float(
                np.sum(np.exp(log_terms - m))
            )
            self.log_max = m
        else:
            self.scaled += float(np.sum(np.exp(log_terms - self.log_max)))

    @property
    def value(self) -> float:
        """The accumulated log-sum-exp."""
        if self.scaled == 0.0:
            return -math.inf
        return self.log_max + math.log(self.scaled)
