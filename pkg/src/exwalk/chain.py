"""Auxiliary Markov chain on windows of the last N jumps.

States are N-bit integers: bit ``b`` holds entry ``b + 1`` of the window
(1 = rightward jump), so bit 0 is the oldest jump and bit N-1 the newest.
One step drops the oldest bit and pushes the new jump on top:

    successor = (v >> 1) | (jump << (N - 1))

The stationary measure is constant on the level sets of the rights-count,
so it is stored as one weight per level (:class:`LevelMeasure`); the full
2^N vector (:class:`FullStationary`) exists only as a brute-force oracle
for small N.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import CapacityError, ConvergenceError
from .model import ThresholdLadder, count_probabilities, jump_probability
from .numutil import log_binom, logit

# 2^N states: dense linear solve up to here ...
DENSE_N_MAX = 10
# ... and power iteration up to here.
BRUTEFORCE_N_MAX = 14

_POWER_STEP_TOL = 1e-14
_POWER_MAX_ITER = 200_000


@dataclass(frozen=True)
class LevelMeasure:
    """Stationary weight per rights-count level, in log space.

    ``log_alpha[k]`` is the log-weight of any single state with k rights;
    ``log_C`` normalizes so that sum_k C(N,k) * exp(log_alpha[k] + log_C)
    equals 1.
    """

    N: int
    log_alpha: np.ndarray
    log_C: float

    def state_log_prob(self, k: int) -> float:
        """Log stationary probability of one state with rights-count k."""
        return float(self.log_alpha[k] + self.log_C)

    def level_masses(self) -> np.ndarray:
        """Total stationary mass of each level set, k = 0..N (sums to 1)."""
        lb = log_binom(self.N, np.arange(self.N + 1))
        return np.exp(lb + self.log_alpha + self.log_C)


@dataclass(frozen=True)
class FullStationary:
    """Stationary probability of every window state (index = bit encoding)."""

    N: int
    probs: np.ndarray

    def by_level(self) -> list[np.ndarray]:
        """Group state probabilities by rights-count."""
        counts = _popcounts(self.N)
        return [self.probs[counts == k] for k in range(self.N + 1)]


def window_to_state(window) -> int:
    """Encode a +/-1 window (oldest first) as an N-bit integer."""
    v = 0
    for b, jump in enumerate(window):
        if jump == 1:
            v |= 1 << b
        elif jump != -1:
            raise ValueError("window entries must be -1 or +1")
    return v


def state_to_window(v: int, N: int) -> tuple[int, ...]:
    """Decode an N-bit state back to a +/-1 window (oldest first)."""
    return tuple(1 if (v >> b) & 1 else -1 for b in range(N))


def _popcounts(N: int) -> np.ndarray:
    states = np.arange(1 << N, dtype=np.uint64)
    return np.bitwise_count(states).astype(np.int64)


def level_weights(ladder: ThresholdLadder) -> LevelMeasure:
    """Explicit stationary level weights of the window chain.

    Within a band the weights grow geometrically with ratio p_i/(1-p_i);
    crossing the band boundary at M_i multiplies by p_{i-1}/(1-p_i).
    """
    ladder.require_valid()
    N = ladder.N
    edges = ladder.thresholds
    log_alpha = np.empty(N + 1)
    prefix = 0.0  # log prod_{k<=i} (p_{k-1}/(1-p_{k-1}))^{M_k - M_{k-1}}
    for i, p_i in enumerate(ladder.p):
        lo, hi = edges[i], min(edges[i + 1] - 1, N)
        ks = np.arange(lo, hi + 1)
        log_alpha[lo : hi + 1] = (
            prefix - math.log1p(-p_i) + (ks - lo) * logit(p_i)
        )
        if i < ladder.l:
            prefix += (edges[i + 1] - edges[i]) * logit(ladder.p[i])
    log_C = -float(logsumexp(log_binom(N, np.arange(N + 1)) + log_alpha))
    return LevelMeasure(N=N, log_alpha=log_alpha, log_C=log_C)


def transition_successors(ladder: ThresholdLadder, v: int) -> list[tuple[int, float]]:
    """The two successor states of ``v`` and their probabilities.

    The rightward successor (new jump +1) is listed first.
    """
    N = ladder.N
    if not 0 <= v < (1 << N):
        raise ValueError(f"state {v} out of range for N={N}")
    pr = jump_probability(ladder, int(v).bit_count())
    base = v >> 1
    return [(base | (1 << (N - 1)), pr), (base, 1.0 - pr)]


def _right_probs(ladder: ThresholdLadder) -> np.ndarray:
    """P(next jump right | state w) for every state w, vectorized."""
    by_count = np.asarray(count_probabilities(ladder))
    return by_count[_popcounts(ladder.N)]


def apply_transition(ladder: ThresholdLadder, mu: np.ndarray) -> np.ndarray:
    """One step of the chain acting on a measure: returns mu @ A.

    States 2y and 2y+1 are the only predecessors of y (new jump -1) and of
    y | 1<<(N-1) (new jump +1), so mu @ A is two pairwise reductions.
    """
    pr = _right_probs(ladder)
    left = (mu * (1.0 - pr)).reshape(-1, 2).sum(axis=1)
    right = (mu * pr).reshape(-1, 2).sum(axis=1)
    return np.concatenate([left, right])


def stationarity_residual(ladder: ThresholdLadder, probs: np.ndarray) -> float:
    """L1 residual || mu A - mu ||_1 of a candidate stationary vector."""
    return float(np.abs(apply_transition(ladder, probs) - probs).sum())


def expand_levels(measure: LevelMeasure) -> FullStationary:
    """Spread a level measure over all 2^N states (small N only)."""
    if measure.N > BRUTEFORCE_N_MAX:
        raise CapacityError(
            f"expanding 2^{measure.N} states exceeds N_max={BRUTEFORCE_N_MAX}"
        )
    probs = np.exp(measure.log_alpha + measure.log_C)[_popcounts(measure.N)]
    return FullStationary(N=measure.N, probs=probs)


def stationary_bruteforce(
    ladder: ThresholdLadder,
    n_max: int = BRUTEFORCE_N_MAX,
    lazy: bool = False,
) -> FullStationary:
    """Stationary measure from the defining equations, no structure assumed.

    Dense linear solve for N <= 10, power iteration above that.  ``lazy``
    mixes the chain with the identity at weight 1/2 (same stationary
    measure, guaranteed aperiodic) as a robustness fallback.
    """
    ladder.require_valid()
    N = ladder.N
    if N > n_max:
        raise CapacityError(f"N={N} exceeds brute-force limit n_max={n_max}")
    size = 1 << N
    if N <= DENSE_N_MAX:
        pr = _right_probs(ladder)
        states = np.arange(size)
        base = states >> 1
        at = np.zeros((size, size))
        at[base, states] = 1.0 - pr
        at[base | (1 << (N - 1)), states] = pr
        # Replace one balance equation with the normalization constraint.
        m = at - np.eye(size)
        m[-1, :] = 1.0
        rhs = np.zeros(size)
        rhs[-1] = 1.0
        probs = np.linalg.solve(m, rhs)
        return FullStationary(N=N, probs=probs)

    mu = np.full(size, 1.0 / size)
    for _ in range(_POWER_MAX_ITER):
        nxt = apply_transition(ladder, mu)
        if lazy:
            nxt = 0.5 * mu + 0.5 * nxt
        step = float(np.abs(nxt - mu).sum())
        mu = nxt
        if step <= _POWER_STEP_TOL:
            return FullStationary(N=N, probs=mu)
    raise ConvergenceError(
        f"power iteration did not reach step tolerance {_POWER_STEP_TOL} "
        f"within {_POWER_MAX_ITER} iterations"
    )


def ergodic_speed(ladder: ThresholdLadder) -> float:
    """Speed as the stationary mean of (2k/N - 1) over rights-counts.

    Evaluated from the level weights without enumerating 2^N states; the
    weighted mean of k is formed from two positive log-sums, so no signed
    cancellation occurs.
    """
    measure = level_weights(ladder)
    N = measure.N
    ks = np.arange(N + 1)
    log_terms = log_binom(N, ks) + measure.log_alpha
    log_total = float(logsumexp(log_terms))
    log_k_total = float(logsumexp(log_terms[1:] + np.log(ks[1:])))
    mean_fraction = math.exp(log_k_total - log_total) / N
    return 2.0 * mean_fraction - 1.0
