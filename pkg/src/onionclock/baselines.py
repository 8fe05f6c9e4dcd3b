"""Baseline logical clocks: Lamport scalars and vector clocks.

These implement the textbook update rules.  The vector-clock comparison is
exact at event granularity; applied at object granularity (each mutation
treated as a local event on the mutating node) it reports temporal order as
causality and therefore produces false positives on forked histories, which
is precisely what the accuracy harness measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .verdicts import CausalVerdict


@dataclass(frozen=True)
class LamportClock:
    value: int = 0


def lamport_step(clock: LamportClock, event: str, peer: LamportClock | None = None) -> LamportClock:
    """Advance a Lamport clock.  event is 'local', 'send', or 'recv'
    (recv requires the peer clock carried by the message)."""
    if event in ("local", "send"):
        return LamportClock(clock.value + 1)
    if event == "recv":
        if peer is None:
            raise ValueError("recv needs the peer clock")
        return LamportClock(max(clock.value, peer.value) + 1)
    raise ValueError(f"unknown event kind {event!r}")


@dataclass(frozen=True)
class VectorClock:
    entries: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=np.int64)


def vc_new(size: int) -> VectorClock:
    if size < 1:
        raise ValueError("system size must be >= 1")
    return VectorClock((0,) * size)


def vc_step(
    clock: VectorClock, self_index: int, event: str, peer: VectorClock | None = None
) -> VectorClock:
    """Advance a vector clock per the standard rules: local/send increment
    own component; recv takes the component-wise max then increments."""
    if not 0 <= self_index < clock.size:
        raise IndexError("node index out of range")
    if event == "recv":
        if peer is None:
            raise ValueError("recv needs the peer clock")
        if peer.size != clock.size:
            raise ValueError("system size mismatch")
        merged = tuple(max(a, b) for a, b in zip(clock.entries, peer.entries))
    elif event in ("local", "send"):
        merged = clock.entries
    else:
        raise ValueError(f"unknown event kind {event!r}")
    bumped = list(merged)
    bumped[self_index] += 1
    return VectorClock(tuple(bumped))


def vc_compare(a: VectorClock, b: VectorClock) -> CausalVerdict:
    """Component-wise partial order.  Equal vectors report AfterOrEqual."""
    if a.size != b.size:
        raise ValueError("system size mismatch")
    a_ge = all(x >= y for x, y in zip(a.entries, b.entries))
    b_ge = all(y >= x for x, y in zip(a.entries, b.entries))
    if a_ge and b_ge:
        return CausalVerdict.AFTER_OR_EQUAL
    if a_ge:
        return CausalVerdict.STRICTLY_AFTER
    if b_ge:
        return CausalVerdict.STRICTLY_BEFORE
    return CausalVerdict.CONCURRENT
