"""Closed-form speed of the excited walk, evaluated stably in log space.

The speed is a ratio of two sums over rights-counts j = 0..N whose terms
span hundreds of orders of magnitude for large N.  All mass accumulation
therefore happens in log space; the signed numerator is never formed
directly but split as (2/N) * sum(j * w_j) - sum(w_j), both positive, so
only a single exp of a difference of log-sums is needed.

A direct rational-arithmetic path (:func:`speed_multi_rational`) is kept
for small N as an independent check on the log-space code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError
from .model import ThresholdLadder
from .numutil import StreamLogSum, log_binom, logit

# Above this, O(N) evaluation is no longer a sane default.
CAPACITY_N = 100_000_000
RATIONAL_N_MAX = 25

_CHUNK = 1 << 20


@dataclass(frozen=True)
class SpeedBreakdown:
    """Speed plus the per-band pieces it is assembled from.

    ``band_log_masses[i]`` is the log of band i's total stationary weight
    (unnormalized); ``band_mean_fraction[i]`` is the weighted mean of j/N
    within the band.  The speed is the mass-weighted average of
    2 * mean_fraction - 1 over bands.
    """

    speed: float
    band_log_masses: tuple[float, ...]
    band_mean_fraction: tuple[float, ...]


def _band_stats(N: int, lo: int, hi: int, log_prefix: float, p: float):
    """Log-mass and mean j/N of one band, streamed in chunks.

    Terms are log_prefix + log C(N,j) + (j - lo) * logit(p) for j in
    [lo, hi]; the mean uses the same terms tilted by log j (j = 0
    contributes nothing to the numerator).
    """
    lg = logit(p)
    mass = StreamLogSum()
    jmass = StreamLogSum()
    j = lo
    while j <= hi:
        j_hi = min(j + _CHUNK - 1, hi)
        js = np.arange(j, j_hi + 1, dtype=np.float64)
        log_w = log_prefix + log_binom(N, js) + (js - lo) * lg
        mass.add(log_w)
        if j == 0:
            jmass.add(log_w[1:] + np.log(js[1:]))
        else:
            jmass.add(log_w + np.log(js))
        j = j_hi + 1
    mean_fraction = math.exp(jmass.value - mass.value) / N
    return mass.value, mean_fraction


def speed_multi(ladder: ThresholdLadder) -> SpeedBreakdown:
    """Exact speed of the multi-threshold walk."""
    ladder.require_valid()
    N = ladder.N
    if N > CAPACITY_N:
        raise CapacityError(f"N={N} exceeds the supported window size {CAPACITY_N}")
    edges = ladder.thresholds
    masses: list[float] = []
    fractions: list[float] = []
    log_prefix = 0.0
    for i, p_i in enumerate(ladder.p):
        lo, hi = edges[i], min(edges[i + 1] - 1, N)
        lm, mf = _band_stats(N, lo, hi, log_prefix - math.log1p(-p_i), p_i)
        masses.append(lm)
        fractions.append(mf)
        if i < ladder.l:
            log_prefix += (edges[i + 1] - edges[i]) * logit(p_i)
    m = max(masses)
    weights = [math.exp(lm - m) for lm in masses]
    total = sum(weights)
    mean_fraction = sum(w * mf for w, mf in zip(weights, fractions)) / total
    return SpeedBreakdown(
        speed=2.0 * mean_fraction - 1.0,
        band_log_masses=tuple(masses),
        band_mean_fraction=tuple(fractions),
    )


def speed_single(N: int, M: int, p0: float, p1: float, strict: bool = True) -> SpeedBreakdown:
    """Speed of the single-threshold walk (the l = 1 case of speed_multi)."""
    return speed_multi(ThresholdLadder(N=N, M=(M,), p=(p0, p1), strict=strict))


def speed_consecutive_oracle(N: int, p0: float, p1: float) -> float:
    """Closed form for M = N (excitement only after N straight rights).

    Independent of the log-space machinery; used as an oracle against
    speed_multi at M = N.
    """
    if not (0.0 < p0 < 1.0 and 0.0 < p1 < 1.0):
        raise ValueError("probabilities must lie in (0, 1)")
    boost = p0**N * (p1 - p0)
    return (boost + (1.0 - p1) * (2.0 * p0 - 1.0)) / (boost + 1.0 - p1)


def speed_multi_rational(ladder: ThresholdLadder) -> Fraction:
    """Exact rational evaluation of the speed for small N.

    Probabilities are taken at their exact binary-float values, so the
    result is the mathematically exact speed of the ladder actually being
    computed in float code; disagreement with speed_multi beyond rounding
    indicates a log-space bug.
    """
    ladder.require_valid()
    N = ladder.N
    if N > RATIONAL_N_MAX:
        raise CapacityError(f"rational path supports N <= {RATIONAL_N_MAX}")
    edges = ladder.thresholds
    num = Fraction(0)
    den = Fraction(0)
    prefix = Fraction(1)
    for i, p_f in enumerate(ladder.p):
        p = Fraction(p_f)
        rho = p / (1 - p)
        lo, hi = edges[i], min(edges[i + 1] - 1, N)
        w = prefix / (1 - p) * math.comb(N, lo)
        for j in range(lo, hi + 1):
            den += w
            num += w * (2 * j - N)
            if j < hi:
                w = w * (N - j) * rho / (j + 1)
        if i < ladder.l:
            p_prev = Fraction(ladder.p[i])
            prefix *= (p_prev / (1 - p_prev)) ** (edges[i + 1] - edges[i])
    return num / (N * den)


def speed_g(N: int, g) -> float:
    """Speed of the walk whose i-th of N thresholds fires probability G(i/N).

    ``g`` is an :class:`exwalk.asymptotics.GSpec`.  Weights are the running
    products of logit(G) over the grid, times binomials, accumulated in log
    space.
    """
    g.require_valid()
    if N < 1:
        raise ValueError("N must be >= 1")
    if N > CAPACITY_N:
        raise CapacityError(f"N={N} exceeds the supported window size {CAPACITY_N}")
    mass = StreamLogSum()
    jmass = StreamLogSum()
    carry = 0.0  # log prod of G/(1-G) over grid points before the chunk
    i = 0
    while i <= N:
        i_hi = min(i + _CHUNK - 1, N)
        js = np.arange(i, i_hi + 1, dtype=np.float64)
        gv = g(js / N)
        lgt = np.log(gv) - np.log1p(-gv)
        cs = np.cumsum(lgt)
        log_f = carry + np.concatenate([[0.0], cs[:-1]])
        carry += cs[-1]
        log_w = log_f + log_binom(N, js) - np.log1p(-gv)
        mass.add(log_w)
        if i == 0:
            jmass.add(log_w[1:] + np.log(js[1:]))
        else:
            jmass.add(log_w + np.log(js))
        i = i_hi + 1
    mean_fraction = math.exp(jmass.value - mass.value) / N
    return 2.0 * mean_fraction - 1.0
