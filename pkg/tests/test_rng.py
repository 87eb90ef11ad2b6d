import numpy as np
import pytest
from hypothesis import given, strategies as st

from smpath.rng import RngStream, mix64, replicate_streams

seeds = st.integers(min_value=0, max_value=2**64 - 1)


@given(seeds, st.integers(0, 2**32))
def test_mix64_is_64_bit_and_deterministic(seed, index):
    a = mix64(seed, index)
    assert 0 <= a < 2**64
    assert a == mix64(seed, index)


def test_same_stream_same_draws():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    np.testing.assert_array_equal(a, b)


def test_substreams_differ():
    draws = [s.generator().standard_normal(4) for s in replicate_streams(11, 8)]
    for i in range(8):
        for j in range(i + 1, 8):
            assert not np.array_equal(draws[i], draws[j])


def test_child_is_a_distinct_stream():
    s = RngStream(5)
    assert s.child(0).substream_seed != s.substream_seed
    assert s.child(1) == s.child(1)


@pytest.mark.parametrize("seed", [-1, 2**64])
def test_rejects_out_of_range_seed(seed):
    with pytest.raises(ValueError):
        RngStream(seed)
