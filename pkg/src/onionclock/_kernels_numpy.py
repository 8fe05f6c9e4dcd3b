"""Pure-numpy implementations of the hot counter kernels.

These are the reference kernels: vectorized, allocation-friendly, and always
available.  ``onionclock._kernels`` re-exports either these or the
numba-compiled variants from ``_kernels_numba`` depending on the
``ONIONCLOCK_NO_NUMBA`` environment flag.
"""

from __future__ import annotations

import numpy as np

# Verdict codes shared by the pairwise comparison kernels.
CODE_CONCURRENT = 0
CODE_AFTER = 1
CODE_BEFORE = -1
CODE_AFTER_OR_EQUAL = 2
CODE_BEFORE_OR_EQUAL = -2


def saturating_add(a: np.ndarray, b: np.ndarray, cap: int) -> np.ndarray:
    """Element-wise a + b clamped to cap.  Inputs are unsigned counter vectors."""
    out = a.astype(np.int64) + b.astype(np.int64)
    np.minimum(out, cap, out=out)
    return out.astype(a.dtype)


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """True iff a >= b at every index."""
    return bool(np.all(a >= b))


def range_sum_ge(prefix_a: np.ndarray, a_lo: int, a_hi: int,
                 prefix_b: np.ndarray, b_lo: int, b_hi: int,
                 ceiling: int) -> bool:
    """Compare two row-range sums of prefix-sum matrices.

    Returns True iff sum(rows a_lo..a_hi) >= sum(rows b_lo..b_hi) at every
    index, where a counter equal to `ceiling` (the aggregate saturation
    point of the left side) is treated as maximal.
    """
    sa = prefix_a[a_hi] - prefix_a[a_lo]
    sb = prefix_b[b_hi] - prefix_b[b_lo]
    return bool(np.all((sa >= sb) | (sa >= ceiling)))


def bc_pair_codes(counters: np.ndarray, depths: np.ndarray,
                  pairs: np.ndarray) -> np.ndarray:
    """Batched counting-Bloom-clock comparison.

    counters: (N, n) int64 matrix, depths: (N,) int64, pairs: (P, 2) indices.
    Returns one verdict code per pair, for the pair's first element relative
    to its second.
    """
    x = counters[pairs[:, 0]]
    y = counters[pairs[:, 1]]
    dx = depths[pairs[:, 0]]
    dy = depths[pairs[:, 1]]
    x_ge = np.all(x >= y, axis=1)
    y_ge = np.all(y >= x, axis=1)
    strict_x = x_ge & ~y_ge
    strict_y = y_ge & ~x_ge
    out = np.full(len(pairs), CODE_CONCURRENT, dtype=np.int8)
    out[strict_x & (dx > dy)] = CODE_AFTER
    out[strict_y & (dy > dx)] = CODE_BEFORE
    rest = out == CODE_CONCURRENT
    out[rest & x_ge & (dx >= dy)] = CODE_AFTER_OR_EQUAL
    rest = out == CODE_CONCURRENT
    out[rest & y_ge & (dy >= dx)] = CODE_BEFORE_OR_EQUAL
    return out


def vc_pair_codes(vectors: np.ndarray, pairs: np.ndarray) -> np.ndarray:
    """Batched vector-clock comparison under the component-wise partial order."""
    x = vectors[pairs[:, 0]]
    y = vectors[pairs[:, 1]]
    x_ge = np.all(x >= y, axis=1)
    y_ge = np.all(y >= x, axis=1)
    out = np.full(len(pairs), CODE_CONCURRENT, dtype=np.int8)
    out[x_ge & y_ge] = CODE_AFTER_OR_EQUAL
    out[x_ge & ~y_ge] = CODE_AFTER
    out[y_ge & ~x_ge] = CODE_BEFORE
    return out
