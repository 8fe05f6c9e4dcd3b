import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onionclock.hashing import HashConfig, hash_indices, state_digest
from onionclock.vbf import COUNTER_DTYPE, Vbf, unit_filter, vbf_dominates, vbf_sum, zero_vbf


def vec(values, width=8):
    return Vbf(width, np.asarray(values, dtype=COUNTER_DTYPE))


def test_unit_filter_sets_hashed_indices():
    cfg = HashConfig(n=8, m=2, seed=9)
    d = state_digest(b"u")
    f = unit_filter(d, cfg)
    expected = np.zeros(8, dtype=COUNTER_DTYPE)
    expected[hash_indices(d, cfg)] = 1
    assert np.array_equal(f.counters, expected)
    assert f.bit_width == 1


def test_unit_filter_duplicate_indices_still_one():
    # n=1 forces every hash function onto index 0
    f = unit_filter(state_digest(b"dup"), HashConfig(n=1, m=3))
    assert f.counters.tolist() == [1]


def test_unit_filter_popcount_at_most_m():
    cfg = HashConfig(n=16, m=4, seed=2)
    for i in range(50):
        f = unit_filter(state_digest(b"pc:%d" % i), cfg)
        assert int((f.counters > 0).sum()) <= cfg.m


def test_sum_basic():
    out = vbf_sum(vec([1, 0, 1], 2), vec([0, 1, 1], 2), out_width=2)
    assert out.counters.tolist() == [1, 1, 2]


def test_sum_saturates_at_width_cap():
    out = vbf_sum(vec([3, 0], 2), vec([1, 0], 2), out_width=2)
    assert out.counters.tolist() == [3, 0]


def test_sum_length_mismatch():
    with pytest.raises(ValueError):
        vbf_sum(vec([1]), vec([1, 2]), out_width=4)


def test_three_unit_filters_sum_to_multiset_counts():
    # brute-force the expected per-index multiset counts
    cfg = HashConfig(n=32, m=3, seed=5)
    digests = [state_digest(b"m:%d" % i) for i in range(3)]
    expected = np.zeros(32, dtype=np.int64)
    for d in digests:
        for idx in set(hash_indices(d, cfg)):
            expected[idx] += 1
    assert expected.max() <= 3  # no saturation at width 2
    total = zero_vbf(32, 2)
    for d in digests:
        total = vbf_sum(total, unit_filter(d, cfg), out_width=2)
    assert total.counters.tolist() == expected.tolist()


def test_dominates():
    assert vbf_dominates(vec([2, 1]), vec([1, 1]))
    assert not vbf_dominates(vec([2, 0]), vec([1, 1]))
    v = vec([3, 7])
    assert vbf_dominates(v, v)


@given(
    st.lists(st.integers(0, 3), min_size=4, max_size=4),
    st.lists(st.integers(0, 3), min_size=4, max_size=4),
    st.lists(st.integers(0, 3), min_size=4, max_size=4),
)
@settings(max_examples=60, deadline=None)
def test_sum_commutative_associative_below_saturation(a, b, c):
    va, vb, vc_ = vec(a, 4), vec(b, 4), vec(c, 4)
    assert vbf_sum(va, vb, 4) == vbf_sum(vb, va, 4)
    left = vbf_sum(vbf_sum(va, vb, 4), vc_, 4)
    right = vbf_sum(va, vbf_sum(vb, vc_, 4), 4)
    assert left == right


def test_counter_cap_enforced():
    with pytest.raises(ValueError):
        Vbf(2, np.asarray([4], dtype=COUNTER_DTYPE))
