"""Variable-bit counting filters: fixed-length counter vectors with a
configurable per-counter bit width and saturating arithmetic.

Counters are stored as uint16 (widths up to 16 bits are supported).  Sums
saturate at 2**bit_width - 1 rather than wrapping: wrapping would let a
counter fall below an ancestor's and break the one-sided-error guarantee,
whereas a saturated counter compares as maximal.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .hashing import HashConfig, hash_indices

MAX_BIT_WIDTH = 16

COUNTER_DTYPE = np.uint16


def width_cap(bit_width: int) -> int:
    """Largest value a counter of this width can hold."""
    if not 1 <= bit_width <= MAX_BIT_WIDTH:
        raise ValueError(f"bit_width must be in [1, {MAX_BIT_WIDTH}]")
    return (1 << bit_width) - 1


@dataclass(frozen=True)
class Vbf:
    """A length-n vector of saturating counters, each < 2**bit_width."""

    bit_width: int
    counters: np.ndarray

    def __post_init__(self) -> None:
        cap = width_cap(self.bit_width)
        if self.counters.dtype != COUNTER_DTYPE:
            raise ValueError("counters must be uint16")
        if self.counters.max(initial=0) > cap:
            raise ValueError("counter exceeds bit-width cap")
        self.counters.setflags(write=False)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vbf):
            return NotImplemented
        return self.bit_width == other.bit_width and np.array_equal(
            self.counters, other.counters
        )

    def __hash__(self) -> int:
        return hash((self.bit_width, self.counters.tobytes()))

    @property
    def n(self) -> int:
        return int(self.counters.shape[0])


def zero_vbf(n: int, bit_width: int) -> Vbf:
    return Vbf(bit_width, np.zeros(n, dtype=COUNTER_DTYPE))


def unit_filter(digest: bytes, cfg: HashConfig) -> Vbf:
    """Width-1 filter with a 1 at each hashed index (set semantics: a
    duplicate index still yields 1)."""
    counters = np.zeros(cfg.n, dtype=COUNTER_DTYPE)
    counters[hash_indices(digest, cfg)] = 1
    return Vbf(1, counters)


def vbf_sum(a: Vbf, b: Vbf, out_width: int) -> Vbf:
    """Element-wise sum at out_width, saturating at 2**out_width - 1."""
    if a.n != b.n:
        raise ValueError("filter lengths differ")
    cap = width_cap(out_width)
    summed = _kernels.saturating_add(a.counters, b.counters, cap)
    return Vbf(out_width, np.asarray(summed, dtype=COUNTER_DTYPE))


def vbf_dominates(a: Vbf, b: Vbf) -> bool:
    """True iff every counter of a >= the corresponding counter of b."""
    if a.n != b.n:
        raise ValueError("filter lengths differ")
    return bool(_kernels.dominates(a.counters, b.counters))
