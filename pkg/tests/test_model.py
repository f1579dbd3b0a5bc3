import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from exwalk import ThresholdLadder, ValidationError, jump_probability, validate
from exwalk.model import WalkState, count_probabilities


def test_validate_ok():
    assert validate(ThresholdLadder(N=5, M=(3,), p=(0.3, 0.7))) == []


def test_validate_equal_thresholds():
    bad = validate(ThresholdLadder(N=5, M=(3, 3), p=(0.3, 0.5, 0.7)))
    assert any("strictly increasing" in v and "M" in v for v in bad)


def test_validate_decreasing_probabilities():
    bad = validate(ThresholdLadder(N=5, M=(3,), p=(0.7, 0.3)))
    assert any("p must be strictly increasing" in v for v in bad)


def test_validate_relaxed_allows_equal_probs():
    assert validate(ThresholdLadder(N=5, M=(3,), p=(0.5, 0.5), strict=False)) == []
    bad = validate(ThresholdLadder(N=5, M=(3,), p=(0.5, 0.5), strict=True))
    assert bad


def test_validate_probability_range():
    bad = validate(ThresholdLadder(N=3, M=(1,), p=(0.0, 0.7)))
    assert any("p[0]" in v for v in bad)


def test_require_valid_raises_with_all_violations():
    ladder = ThresholdLadder(N=5, M=(3, 3), p=(0.7, 0.5, 0.6))
    with pytest.raises(ValidationError) as err:
        ladder.require_valid()
    assert len(err.value.violations) >= 2


def test_jump_probability_bands():
    ladder = ThresholdLadder(N=5, M=(3,), p=(0.3, 0.7))
    assert jump_probability(ladder, 2) == 0.3
    assert jump_probability(ladder, 3) == 0.7
    wide = ThresholdLadder(N=6, M=(2, 5), p=(0.2, 0.5, 0.9))
    assert jump_probability(wide, 4) == 0.5


def test_jump_probability_out_of_range():
    ladder = ThresholdLadder(N=5, M=(3,), p=(0.3, 0.7))
    with pytest.raises(ValueError):
        jump_probability(ladder, -1)
    with pytest.raises(ValueError):
        jump_probability(ladder, 6)


def test_l_zero_is_plain_walk():
    ladder = ThresholdLadder(N=4, M=(), p=(0.6,))
    assert validate(ladder) == []
    assert [jump_probability(ladder, k) for k in range(5)] == [0.6] * 5


@st.composite
def ladders(draw):
    n = draw(st.integers(min_value=1, max_value=20))
    l = draw(st.integers(min_value=0, max_value=min(4, n)))
    thresholds = draw(
        st.lists(
            st.integers(min_value=1, max_value=n), min_size=l, max_size=l, unique=True
        ).map(sorted)
    )
    probs = draw(
        st.lists(
            st.floats(min_value=0.01, max_value=0.99),
            min_size=l + 1,
            max_size=l + 1,
            unique=True,
        ).map(sorted)
    )
    return ThresholdLadder(N=n, M=tuple(thresholds), p=tuple(probs))


@settings(max_examples=80, deadline=None)
@given(ladders())
def test_jump_probability_properties(ladder):
    probs = count_probabilities(ladder)
    # nondecreasing, values drawn from the ladder, jumps exactly at thresholds
    assert all(b >= a for a, b in zip(probs, probs[1:]))
    assert set(probs) <= set(ladder.p)
    jumps = {k for k in range(1, ladder.N + 1) if probs[k] != probs[k - 1]}
    assert jumps == set(ladder.M)
    assert probs == [jump_probability(ladder, k) for k in range(ladder.N + 1)]


def test_json_round_trip():
    ladder = ThresholdLadder(N=7, M=(2, 5), p=(0.2, 0.4, 0.8))
    again = ThresholdLadder.from_json(ladder.to_json())
    assert again == ladder
    relaxed = ThresholdLadder(N=3, M=(2,), p=(0.5, 0.5), strict=False)
    assert ThresholdLadder.from_json(relaxed.to_json()) == relaxed


def test_walk_state_step_fifo():
    state = WalkState([1, -1, 1])
    assert state.rights_count == 2
    assert state.position == 1
    state.step(-1)
    assert tuple(state.window) == (-1, 1, -1)
    assert state.rights_count == 1 == state.recount()
    assert state.position == 0
    state.step(1)
    assert tuple(state.window) == (1, -1, 1)
    assert state.rights_count == 2 == state.recount()


def test_walk_state_rejects_bad_jump():
    state = WalkState([1, -1])
    with pytest.raises(ValueError):
        state.step(0)
