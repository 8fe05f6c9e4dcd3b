"""Plain counting Bloom clock: a single unbounded counter vector plus a depth.

Each state transition hashes the new state's digest to m indices and
increments those counters (one increment per hash-function occurrence, so a
colliding pair of functions adds 2).  Comparison is the classic three-way
rule: strict domination with a greater depth means strictly-after, domination
with depth >= means after-or-equal, anything else is concurrent.  False
positives are possible through index collisions; false negatives are not.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .hashing import HashConfig, hash_indices
from .verdicts import CausalVerdict

BC_DTYPE = np.int64


@dataclass(frozen=True)
class BloomClock:
    config: HashConfig
    counters: np.ndarray
    depth: int

    def __post_init__(self) -> None:
        self.counters.setflags(write=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BloomClock):
            return NotImplemented
        return (
            self.config == other.config
            and self.depth == other.depth
            and np.array_equal(self.counters, other.counters)
        )

    def __hash__(self) -> int:
        return hash((self.config, self.depth, self.counters.tobytes()))


def bc_new(cfg: HashConfig) -> BloomClock:
    return BloomClock(cfg, np.zeros(cfg.n, dtype=BC_DTYPE), 0)


def bc_tick(clock: BloomClock, digest: bytes) -> BloomClock:
    """Record one transition: increment per hash occurrence, depth + 1."""
    counters = clock.counters.copy()
    np.add.at(counters, hash_indices(digest, clock.config), 1)
    return BloomClock(clock.config, counters, clock.depth + 1)


def bc_merge(a: BloomClock, b: BloomClock) -> BloomClock:
    """Join two histories: per-index maximum, depth = max(depths).

    The maximum keeps the result dominating both inputs, so descent from
    either parent stays detectable.
    """
    if a.config != b.config:
        raise ValueError("hash config mismatch")
    return BloomClock(a.config, np.maximum(a.counters, b.counters), max(a.depth, b.depth))


def bc_compare(x: BloomClock, y: BloomClock) -> CausalVerdict:
    """Verdict for x relative to y."""
    if x.config != y.config:
        raise ValueError("hash config mismatch")
    x_ge = bool(np.all(x.counters >= y.counters))
    y_ge = bool(np.all(y.counters >= x.counters))
    if x_ge and not y_ge and x.depth > y.depth:
        return CausalVerdict.STRICTLY_AFTER
    if y_ge and not x_ge and y.depth > x.depth:
        return CausalVerdict.STRICTLY_BEFORE
    if x_ge and x.depth >= y.depth:
        return CausalVerdict.AFTER_OR_EQUAL
    if y_ge and y.depth >= x.depth:
        return CausalVerdict.BEFORE_OR_EQUAL
    return CausalVerdict.CONCURRENT
