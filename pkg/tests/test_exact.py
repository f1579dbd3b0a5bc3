import numpy as np
import pytest

from exwalk import (
    CapacityError,
    GSpec,
    ThresholdLadder,
    ergodic_speed,
    speed_consecutive_oracle,
    speed_g,
    speed_multi,
    speed_single,
)
from exwalk.chain import stationary_bruteforce
from exwalk.exact import speed_multi_rational

from conftest import random_ladder


def test_consecutive_case_matches_closed_form():
    # s(2,2;0.5,0.8) = 0.075 / 0.275 = 3/11
    result = speed_multi(ThresholdLadder(N=2, M=(2,), p=(0.5, 0.8)))
    assert result.speed == pytest.approx(3 / 11, abs=1e-14)
    assert speed_consecutive_oracle(2, 0.5, 0.8) == pytest.approx(3 / 11, abs=1e-14)


def test_persistent_walk_balanced_pair():
    # p1 = 1 - p0 makes the N = M = 1 walk speed vanish
    assert speed_single(1, 1, 0.4, 0.6).speed == pytest.approx(0.0, abs=1e-15)
    assert speed_consecutive_oracle(1, 0.4, 0.6) == pytest.approx(0.0, abs=1e-15)


def test_equal_probabilities_give_plain_walk_speed():
    for p in (0.17, 0.5, 0.83):
        ladder = ThresholdLadder(N=9, M=(2, 6), p=(p, p, p), strict=False)
        assert speed_multi(ladder).speed == pytest.approx(2 * p - 1, abs=1e-13)
    sym = ThresholdLadder(N=6, M=(3,), p=(0.5, 0.5), strict=False)
    assert speed_multi(sym).speed == pytest.approx(0.0, abs=1e-14)


def test_matches_bruteforce_chain_small():
    ladder = ThresholdLadder(N=3, M=(2,), p=(0.3, 0.7))
    full = stationary_bruteforce(ladder)
    counts = np.bitwise_count(np.arange(8, dtype=np.uint64)).astype(np.float64)
    brute_speed = float(((2.0 * counts / 3 - 1.0) * full.probs).sum())
    assert speed_multi(ladder).speed == pytest.approx(brute_speed, abs=1e-12)


def test_oracle_agreement_consecutive(rng):
    for _ in range(100):
        n = int(rng.integers(1, 31))
        p0 = float(rng.uniform(0.02, 0.9))
        p1 = float(rng.uniform(p0 + 0.02, 0.98))
        got = speed_single(n, n, p0, p1).speed
        want = speed_consecutive_oracle(n, p0, p1)
        assert got == pytest.approx(want, abs=1e-12)


def test_oracle_large_n_limit():
    # p0^N -> 0 leaves the unexcited speed
    assert speed_consecutive_oracle(4000, 0.3, 0.9) == pytest.approx(
        2 * 0.3 - 1, abs=1e-12
    )


def test_single_is_multi_at_l1(rng):
    for _ in range(20):
        n = int(rng.integers(1, 40))
        m = int(rng.integers(1, n + 1))
        p0 = float(rng.uniform(0.05, 0.7))
        p1 = float(rng.uniform(p0 + 0.05, 0.95))
        a = speed_single(n, m, p0, p1).speed
        b = speed_multi(ThresholdLadder(N=n, M=(m,), p=(p0, p1))).speed
        assert a == b  # same code path by construction


def test_speed_bounded(rng):
    for _ in range(50):
        ladder = random_ladder(rng, n_max=60)
        result = speed_multi(ladder)
        assert -1.0 <= result.speed <= 1.0
        edges = ladder.thresholds
        for i, mf in enumerate(result.band_mean_fraction):
            lo, hi = edges[i], min(edges[i + 1] - 1, ladder.N)
            assert lo / ladder.N - 1e-12 <= mf <= hi / ladder.N + 1e-12


def test_breakdown_reassembles_speed(rng):
    for _ in range(20):
        ladder = random_ladder(rng, n_max=40)
        result = speed_multi(ladder)
        logs = np.asarray(result.band_log_masses)
        weights = np.exp(logs - logs.max())
        weights /= weights.sum()
        rebuilt = float(
            (weights * (2.0 * np.asarray(result.band_mean_fraction) - 1.0)).sum()
        )
        assert rebuilt == pytest.approx(result.speed, abs=1e-13)


def test_log_space_matches_rational(rng):
    for _ in range(30):
        ladder = random_ladder(rng, n_max=25)
        approx = speed_multi(ladder).speed
        exact = float(speed_multi_rational(ladder))
        assert approx == pytest.approx(exact, rel=1e-10, abs=1e-12)


def test_matches_ergodic_small(rng):
    for _ in range(30):
        ladder = random_ladder(rng, n_max=10)
        assert speed_multi(ladder).speed == pytest.approx(
            ergodic_speed(ladder), abs=1e-12
        )


def test_capacity_guard():
    ladder = ThresholdLadder(N=200_000_001, M=(5,), p=(0.3, 0.7))
    with pytest.raises(CapacityError):
        speed_multi(ladder)


def test_speed_g_constant():
    for q in (0.2, 0.5, 0.77):
        g = GSpec.constant(q)
        for n in (1, 5, 40):
            assert speed_g(n, g) == pytest.approx(2 * q - 1, abs=1e-12)


def test_speed_g_matches_ladder_chain():
    g = GSpec.linear(0.3, 0.7)
    ladder = ThresholdLadder(
        N=3, M=(1, 2, 3), p=tuple(g.at(i / 3) for i in range(4))
    )
    assert speed_g(3, g) == pytest.approx(ergodic_speed(ladder), abs=1e-13)


def test_speed_g_large_n_near_limit():
    # fixed point of G(x) = 0.2 + 0.4 x is 1/3
    g = GSpec.linear(0.2, 0.6)
    assert speed_g(4000, g) == pytest.approx(-1 / 3, abs=0.02)
