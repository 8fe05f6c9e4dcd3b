import numpy as np
import pytest
from scipy import stats

from onionclock.hashing import HashConfig, hash_indices, hash_u64, state_digest


def test_deterministic_across_calls():
    cfg = HashConfig(n=8, m=2, seed=7)
    d = state_digest(b"some state")
    assert hash_indices(d, cfg) == hash_indices(d, cfg)


def test_single_bucket_always_zero():
    d = state_digest(b"whatever")
    for seed in (0, 1, 99):
        assert hash_indices(d, HashConfig(n=1, m=3, seed=seed)) == [0, 0, 0]


def test_output_length_is_m():
    d = state_digest(b"x")
    for m in (1, 4, 9):
        assert len(hash_indices(d, HashConfig(n=64, m=m))) == m


def test_seed_changes_family():
    d = state_digest(b"x")
    a = hash_indices(d, HashConfig(n=1 << 20, m=4, seed=1))
    b = hash_indices(d, HashConfig(n=1 << 20, m=4, seed=2))
    assert a != b


def test_index_distribution_uniform():
    # chi-square over 1000 random digests, 256 buckets, 4 functions each
    cfg = HashConfig(n=256, m=4, seed=3)
    counts = np.zeros(cfg.n, dtype=np.int64)
    for i in range(1000):
        for idx in hash_indices(state_digest(b"sample:%d" % i), cfg):
            counts[idx] += 1
    _, p = stats.chisquare(counts)
    assert p > 0.01


def test_invalid_config_rejected():
    with pytest.raises(ValueError):
        HashConfig(n=0, m=1)
    with pytest.raises(ValueError):
        HashConfig(n=1, m=0)


def test_hash_u64_stable():
    assert hash_u64(b"ring") == hash_u64(b"ring")
    assert hash_u64(b"a") != hash_u64(b"b")
