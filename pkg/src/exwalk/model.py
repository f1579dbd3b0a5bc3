"""Walk configurations and the jump rule.

A walk remembers its last ``N`` jumps.  The number of rightward jumps among
them (the rights-count) selects the probability that the next jump goes
right: counts in ``[M_i, M_{i+1})`` use probability ``p_i``, with the
sentinels ``M_0 = 0`` and ``M_{l+1} = N + 1`` always in force.

All types here are immutable after construction except :class:`WalkState`,
which is single-owner mutable; the functions are pure.
"""

from __future__ import annotations

import json
from bisect import bisect_right
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from .errors import ValidationError

# Probabilities must stay inside [PROB_EPS, 1 - PROB_EPS] so that log-space
# arithmetic downstream is finite.
PROB_EPS = 1e-12


@dataclass(frozen=True)
class ThresholdLadder:
    """Immutable walk configuration: window size, thresholds, probabilities.

    ``strict=True`` demands strictly increasing probabilities (the model's
    standing assumption).  ``strict=False`` additionally admits equal
    neighbours, which only matters for degenerate test configurations where
    the closed forms stay valid.
    """

    N: int
    M: tuple[int, ...]
    p: tuple[float, ...]
    strict: bool = True

    def __post_init__(self):
        object.__setattr__(self, "M", tuple(int(m) for m in self.M))
        object.__setattr__(self, "p", tuple(float(q) for q in self.p))

    @property
    def l(self) -> int:
        """Number of threshold stages."""
        return len(self.M)

    @property
    def thresholds(self) -> tuple[int, ...]:
        """(M_0, M_1, ..., M_l, M_{l+1}) including both sentinels."""
        return (0,) + self.M + (self.N + 1,)

    def violations(self) -> list[str]:
        return validate(self)

    def require_valid(self) -> "ThresholdLadder":
        bad = validate(self)
        if bad:
            raise ValidationError(bad)
        return self

    def to_json(self) -> str:
        obj = {"N": self.N, "M": list(self.M), "p": list(self.p)}
        if not self.strict:
            obj["strict"] = False
        return json.dumps(obj)

    @classmethod
    def from_json(cls, text: str) -> "ThresholdLadder":
        obj = json.loads(text)
        return cls(
            N=obj["N"],
            M=tuple(obj.get("M", ())),
            p=tuple(obj["p"]),
            strict=obj.get("strict", True),
        )


@lru_cache(maxsize=256)
def _violations(ladder: ThresholdLadder) -> tuple[str, ...]:
    out: list[str] = []
    if ladder.N < 1:
        out.append("N must be a positive integer")
    if len(ladder.p) != len(ladder.M) + 1:
        out.append(
            "p must have exactly one more entry than M "
            f"(got {len(ladder.p)} probabilities for {len(ladder.M)} thresholds)"
        )
    for i, m in enumerate(ladder.M, start=1):
        if not (1 <= m <= ladder.N):
            out.append(f"M[{i}]={m} must lie in [1, N={ladder.N}]")
    for i in range(1, len(ladder.M)):
        if ladder.M[i] <= ladder.M[i - 1]:
            out.append(f"M must be strictly increasing (M[{i}]={ladder.M[i - 1]} >= M[{i + 1}]={ladder.M[i]})")
    for i, q in enumerate(ladder.p):
        if not (PROB_EPS <= q <= 1.0 - PROB_EPS):
            out.append(f"p[{i}]={q} must lie in [{PROB_EPS}, {1 - PROB_EPS}]")
    for i in range(1, len(ladder.p)):
        if ladder.strict and ladder.p[i] <= ladder.p[i - 1]:
            out.append(f"p must be strictly increasing (p[{i - 1}]={ladder.p[i - 1]} >= p[{i}]={ladder.p[i]})")
        elif not ladder.strict and ladder.p[i] < ladder.p[i - 1]:
            out.append(f"p must be nondecreasing (p[{i - 1}]={ladder.p[i - 1]} > p[{i}]={ladder.p[i]})")
    return tuple(out)


def validate(ladder: ThresholdLadder) -> list[str]:
    """Return every violated invariant of the ladder (empty list = ok)."""
    return list(_violations(ladder))


def jump_probability(ladder: ThresholdLadder, k: int) -> float:
    """Probability of a rightward jump given ``k`` recent rightward jumps.

    Returns p_i for the unique band with M_i <= k < M_{i+1}.
    """
    ladder.require_valid()
    if not 0 <= k <= ladder.N:
        raise ValueError(f"rights-count k={k} out of range [0, {ladder.N}]")
    return ladder.p[bisect_right(ladder.M, k)]


def count_probabilities(ladder: ThresholdLadder) -> list[float]:
    """Jump probability for every rights-count 0..N (band lookup table)."""
    ladder.require_valid()
    out = []
    band = 0
    for k in range(ladder.N + 1):
        while band < ladder.l and k >= ladder.M[band]:
            band += 1
        out.append(ladder.p[band])
    return out


class WalkState:
    """Mutable walk state: position plus the window of the last N jumps.

    ``window[0]`` is the oldest jump and is evicted on the next step.
    Single-owner: not safe to share across threads.
    """

    __slots__ = ("position", "window", "rights_count")

    def __init__(self, jumps: Iterable[int], position: int | None = None):
        jumps = tuple(jumps)
        if any(j not in (-1, 1) for j in jumps):
            raise ValueError("window entries must be -1 or +1")
        self.window = deque(jumps, maxlen=len(jumps))
        self.rights_count = sum(1 for j in jumps if j == 1)
        self.position = sum(jumps) if position is None else position

    def step(self, jump: int) -> None:
        """Evict the oldest jump, append the newest, update the counters."""
        if jump not in (-1, 1):
            raise ValueError("jump must be -1 or +1")
        evicted = self.window[0]
        self.window.append(jump)  # maxlen evicts window[0]
        self.rights_count += (jump == 1) - (evicted == 1)
        self.position += jump

    def recount(self) -> int:
        """Recount rights in the window from scratch (integrity checks)."""
        return sum(1 for j in self.window if j == 1)
