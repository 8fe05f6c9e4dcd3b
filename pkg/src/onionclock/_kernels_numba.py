"""Numba-compiled counter kernels.

Same contracts as ``_kernels_numpy``; loop formulations that numba compiles
to tight machine code.  Compilation results are cached on disk so repeat
runs skip the JIT cost.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ._kernels_numpy import (
    CODE_AFTER,
    CODE_AFTER_OR_EQUAL,
    CODE_BEFORE,
    CODE_BEFORE_OR_EQUAL,
    CODE_CONCURRENT,
)


@njit(cache=True)
def saturating_add(a, b, cap):
    out = np.empty_like(a)
    for i in range(a.shape[0]):
        v = np.int64(a[i]) + np.int64(b[i])
        if v > cap:
            v = cap
        out[i] = v
    return out


@njit(cache=True)
def dominates(a, b):
    for i in range(a.shape[0]):
        if a[i] < b[i]:
            return False
    return True


@njit(cache=True)
def range_sum_ge(prefix_a, a_lo, a_hi, prefix_b, b_lo, b_hi, ceiling):
    for i in range(prefix_a.shape[1]):
        sa = prefix_a[a_hi, i] - prefix_a[a_lo, i]
        sb = prefix_b[b_hi, i] - prefix_b[b_lo, i]
        if sa < sb and sa < ceiling:
            return False
    return True


@njit(cache=True)
def bc_pair_codes(counters, depths, pairs):
    out = np.empty(pairs.shape[0], dtype=np.int8)
    n = counters.shape[1]
    for p in range(pairs.shape[0]):
        xi = pairs[p, 0]
        yi = pairs[p, 1]
        x_ge = True
        y_ge = True
        for i in range(n):
            cx = counters[xi, i]
            cy = counters[yi, i]
            if cx < cy:
                x_ge = False
            if cy < cx:
                y_ge = False
            if not x_ge and not y_ge:
                break
        dx = depths[xi]
        dy = depths[yi]
        if x_ge and not y_ge and dx > dy:
            out[p] = CODE_AFTER
        elif y_ge and not x_ge and dy > dx:
            out[p] = CODE_BEFORE
        elif x_ge and dx >= dy:
            out[p] = CODE_AFTER_OR_EQUAL
        elif y_ge and dy >= dx:
            out[p] = CODE_BEFORE_OR_EQUAL
        else:
            out[p] = CODE_CONCURRENT
    return out


@njit(cache=True)
def vc_pair_codes(vectors, pairs):
    out = np.empty(pairs.shape[0], dtype=np.int8)
    n = vectors.shape[1]
    for p in range(pairs.shape[0]):
        xi = pairs[p, 0]
        yi = pairs[p, 1]
        x_ge = True
        y_ge = True
        for i in range(n):
            vx = vectors[xi, i]
            vy = vectors[yi, i]
            if vx < vy:
                x_ge = False
            if vy < vx:
                y_ge = False
            if not x_ge and not y_ge:
                break
        if x_ge and y_ge:
            out[p] = CODE_AFTER_OR_EQUAL
        elif x_ge:
            out[p] = CODE_AFTER
        elif y_ge:
            out[p] = CODE_BEFORE
        else:
            out[p] = CODE_CONCURRENT
    return out
