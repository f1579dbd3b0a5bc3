"""High-throughput Monte Carlo simulation of the excited walk.

The window of recent jumps lives in a packed bit buffer (bit ``h`` of word
``h // 64`` is the slot that will be overwritten next) and the rights-count
is maintained incrementally, so one step costs O(1) regardless of the
window size.  The hot loop is JIT-compiled.

Randomness comes from the Philox 4x64-10 counter-based generator: replica
``i`` of master seed ``s`` uses key ``(s, i)``, and each uniform is the
usual 53-bit mapping ``(word >> 11) * 2**-53`` of one 64-bit output.  A
jump goes right exactly when ``u < p``.  This makes every result a pure
function of (ladder, steps, seed), independent of threading and chunking.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .asymptotics import LimitSpec, limit_speed_multi
from .model import ThresholdLadder, WalkState, count_probabilities

RNG_ALGORITHM = "philox4x64-10/double53"

_BLOCK = 1 << 20
_EMPTY_REC = np.empty(0, dtype=np.uint8)


@dataclass(frozen=True)
class SimResult:
    """Aggregated Monte Carlo estimate of the speed.

    ``steps`` and ``displacement`` are totals across replicas;
    ``empirical_speed`` is the mean of per-replica speeds and ``stderr``
    their standard error (0 for a single replica).
    """

    steps: int
    displacement: int
    empirical_speed: float
    stderr: float
    replica_count: int
    seed: int
    rng: str = RNG_ALGORITHM


@dataclass(frozen=True)
class IncrementCensus:
    """Post-burn-in increment statistics pooled across replicas.

    ``pattern_counts`` maps +/-1 tuples (earliest increment first) to
    counts over non-overlapping windows, present when a pattern length was
    requested.
    """

    m: int
    burn_in: int
    frequency_plus: float
    expected_plus: float
    z_score: float
    replica_count: int
    seed: int
    pattern_counts: dict | None = None
    pattern_windows: int = 0


def thread_count(requested: int | None = None) -> int:
    """Worker count for replica fan-out; EXWALK_THREADS caps it globally."""
    if requested is not None:
        return max(1, int(requested))
    env = os.environ.get("EXWALK_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@njit(cache=True, nogil=True)
def _advance(n, words, head, rights, probs, u, rec):
    """Advance the walk by len(u) steps; returns (displacement, head, rights).

    Mutates ``words`` in place; records each new jump bit into ``rec`` when
    it is non-empty (must then have the same length as ``u``).
    """
    disp = 0
    record = rec.shape[0] > 0
    one = np.uint64(1)
    for t in range(u.shape[0]):
        wi = head >> 6
        bi = np.uint64(head & 63)
        old = np.int64((words[wi] >> bi) & one)
        if u[t] < probs[rights]:
            new = 1
        else:
            new = 0
        words[wi] = (words[wi] & ~(one << bi)) | (np.uint64(new) << bi)
        rights += new - old
        disp += 2 * new - 1
        head += 1
        if head == n:
            head = 0
        if record:
            rec[t] = np.uint8(new)
    return disp, head, rights


_warmed = False


def _warm_kernel() -> None:
    """Compile the kernel once before any thread fan-out."""
    global _warmed
    if not _warmed:
        _advance(
            1,
            np.zeros(1, dtype=np.uint64),
            0,
            0,
            np.full(2, 0.5),
            np.zeros(1),
            _EMPTY_REC,
        )
        _warmed = True


def _generator(seed: int, replica: int) -> np.random.Generator:
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed={seed} must be a 64-bit unsigned value")
    return np.random.Generator(np.random.Philox(key=[seed, replica]))


def _pack_window(bits: np.ndarray) -> np.ndarray:
    """Pack boolean jumps into 64-bit words, slot i -> bit i (little-endian)."""
    packed = np.packbits(bits, bitorder="little")
    buf = np.zeros(-(-bits.size // 64) * 8, dtype=np.uint8)
    buf[: packed.size] = packed
    return buf.view(np.uint64)


def _sim_core(
    ladder: ThresholdLadder,
    total_steps: int,
    record_last: int,
    seed: int,
    replica: int,
    check_window: bool = False,
):
    """Run one replica; returns (displacement, recorded bits or None).

    The first N jumps are i.i.d. with the pre-threshold probability; after
    that each jump uses the rights-count band rule.
    """
    ladder.require_valid()
    N = ladder.N
    if total_steps < N:
        raise ValueError(f"steps={total_steps} must be >= N={N}")
    if record_last > total_steps - N:
        raise ValueError("cannot record increments inside the fill phase")
    gen = _generator(seed, replica)
    if check_window:
        return _sim_core_reference(ladder, total_steps, record_last, gen)

    _warm_kernel()
    probs = np.asarray(count_probabilities(ladder))
    bits = gen.random(N) < ladder.p[0]
    words = _pack_window(bits)
    rights = int(bits.sum())
    disp = 2 * rights - N
    head = 0

    remaining = total_steps - N - record_last
    while remaining > 0:
        n = min(_BLOCK, remaining)
        d, head, rights = _advance(N, words, head, rights, probs, gen.random(n), _EMPTY_REC)
        disp += d
        remaining -= n
        if int(np.bitwise_count(words).sum()) != rights:
            raise RuntimeError("window bit count drifted from the running total")

    rec = None
    if record_last > 0:
        rec = np.empty(record_last, dtype=np.uint8)
        d, head, rights = _advance(
            N, words, head, rights, probs, gen.random(record_last), rec
        )
        disp += d
    return disp, rec


def _sim_core_reference(ladder, total_steps, record_last, gen):
    """Pure-Python stepper consuming the identical uniform stream.

    Rechecks the rights-count against a full window recount at every step;
    useful as a debug oracle and far too slow for production sizes.
    """
    N = ladder.N
    probs = count_probabilities(ladder)
    u = gen.random(N)
    state = WalkState([1 if x < ladder.p[0] else -1 for x in u])
    disp = state.position
    rec = np.empty(record_last, dtype=np.uint8) if record_last > 0 else None
    record_from = total_steps - N - record_last
    for t in range(total_steps - N):
        jump = 1 if gen.random() < probs[state.rights_count] else -1
        state.step(jump)
        if state.rights_count != state.recount():
            raise RuntimeError("incremental rights-count diverged from recount")
        disp += jump
        if t >= record_from:
            rec[t - record_from] = 1 if jump == 1 else 0
    return disp, rec


def run(
    ladder: ThresholdLadder, steps: int, seed: int, check_window: bool = False
) -> SimResult:
    """Simulate a single path of ``steps`` jumps (replica index 0)."""
    steps = int(steps)
    disp, _ = _sim_core(ladder, steps, 0, seed, 0, check_window=check_window)
    return SimResult(
        steps=steps,
        displacement=disp,
        empirical_speed=disp / steps,
        stderr=0.0,
        replica_count=1,
        seed=seed,
    )


def _fan_out(work, replicas: int, threads: int | None):
    """Run ``work(i)`` for every replica index, results in index order."""
    workers = min(thread_count(threads), replicas)
    if workers <= 1:
        return [work(i) for i in range(replicas)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(work, range(replicas)))


def estimate_speed(
    ladder: ThresholdLadder,
    steps: int,
    replicas: int,
    seed: int,
    threads: int | None = None,
) -> SimResult:
    """Mean and standard error of the empirical speed across replicas.

    Replica ``i`` uses Philox key (seed, i), so the estimate is invariant
    under the number of worker threads.
    """
    steps = int(steps)
    replicas = int(replicas)
    if replicas < 2:
        raise ValueError("need at least 2 replicas for a standard error")
    _warm_kernel()
    disps = _fan_out(
        lambda i: _sim_core(ladder, steps, 0, seed, i)[0], replicas, threads
    )
    speeds = np.asarray(disps, dtype=np.float64) / steps
    return SimResult(
        steps=steps * replicas,
        displacement=int(sum(disps)),
        empirical_speed=float(np.mean(speeds)),
        stderr=float(np.std(speeds, ddof=1) / math.sqrt(replicas)),
        replica_count=replicas,
        seed=seed,
    )


def _expected_plus(ladder: ThresholdLadder) -> float:
    """Dominant-band jump probability p_{i0} for r_i = M_i / N."""
    if len(set(ladder.p)) == 1:
        return ladder.p[0]
    spec = LimitSpec(
        p=ladder.p, r=tuple(Fraction(m, ladder.N) for m in ladder.M)
    )
    report = limit_speed_multi(spec)
    return ladder.p[report.argmax[0]]


def increment_census(
    ladder: ThresholdLadder,
    burn_in: int,
    m: int,
    replicas: int,
    seed: int,
    pattern_length: int | None = None,
    threads: int | None = None,
) -> IncrementCensus:
    """Record m increments per replica after N + burn_in steps.

    Pools the +1 frequency across replicas and scores it against the
    dominant-band probability; optionally tabulates length-q patterns over
    non-overlapping windows.
    """
    burn_in = int(burn_in)
    m = int(m)
    replicas = int(replicas)
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    if m < 1:
        raise ValueError("window m must be >= 1")
    expected = _expected_plus(ladder)
    total_steps = ladder.N + burn_in + m
    _warm_kernel()
    recs = _fan_out(
        lambda i: _sim_core(ladder, total_steps, m, seed, i)[1], replicas, threads
    )
    plus = sum(int(r.sum()) for r in recs)
    samples = m * replicas
    freq = plus / samples
    z = (freq - expected) / math.sqrt(expected * (1.0 - expected) / samples)

    pattern_counts = None
    pattern_windows = 0
    if pattern_length is not None:
        q = int(pattern_length)
        if q < 1 or q > m:
            raise ValueError(f"pattern_length={q} out of [1, m]")
        per = m // q
        weights = 1 << np.arange(q - 1, -1, -1)  # earliest increment = MSB
        counts = np.zeros(1 << q, dtype=np.int64)
        for r in recs:
            codes = r[: per * q].reshape(per, q).astype(np.int64) @ weights
            counts += np.bincount(codes, minlength=1 << q)
        pattern_windows = per * replicas
        pattern_counts = {
            tuple(1 if (code >> (q - 1 - b)) & 1 else -1 for b in range(q)): int(c)
            for code, c in enumerate(counts)
        }
    return IncrementCensus(
        m=m,
        burn_in=burn_in,
        frequency_plus=freq,
        expected_plus=expected,
        z_score=z,
        replica_count=replicas,
        seed=seed,
        pattern_counts=pattern_counts,
        pattern_windows=pattern_windows,
    )
