"""Decaying onion Bloom clock: layered variable-bit filters over a sliding
window of state-transition history.

A clock holds |L| layers of slots.  Layer 1 keeps one unit filter per recent
transition; when a slot is displaced off the end of a layer it is absorbed
into the next layer's head slot (summed counter-wise) until that slot reaches
its capacity, at which point the head shifts back and a fresh accumulation
starts.  Whatever falls off the final layer is deleted.  The result is fine
granularity for recent history, coarser aggregates for older history, and a
bounded total footprint regardless of how long the history grows.

Two decay modes are supported:

* ``complete`` - a slot at layer i+1 absorbs only whole slots from layer i,
  up to the largest multiple of the layer-i slot capacity that fits in its
  bit width.  Simple, but can waste capacity when widths don't divide.
* ``incomplete`` - head slots absorb up to their full 2**width - 1 unit
  capacity; whenever an entire layer plus the next head would top the next
  head up exactly, the layer is flushed down eagerly so no space is wasted.

Merging supports three strategies: ``extending`` keeps both clocks' slot
tracks side by side (transient extra space, dropped once the window has
cycled past the merge), ``maxima`` folds them into one track of per-index
maxima (constant size, more false positives), and ``hybrid`` extends up to a
budget of tracks and then folds the oldest ones.

Every slot records the interval of lineage depths it covers.  Comparison
aligns intervals that both clocks can express exactly - summing finer slots
to match coarser ones - and checks counter domination over every aligned
interval.  Pairs whose windows share no expressible interval are reported
``Indeterminate`` rather than guessed at.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from . import _kernels
from .hashing import DIGEST_SIZE, HashConfig, state_digest
from .vbf import COUNTER_DTYPE, MAX_BIT_WIDTH, unit_filter, width_cap
from .verdicts import CausalVerdict

DECAY_MODES = ("complete", "incomplete")
MERGE_STRATEGIES = ("extending", "maxima", "hybrid")

# Extra (non-structural) claims retained per slot after merges.  Dropping a
# claim only shrinks what the clock can align against; it never invents one.
MAX_CLAIMS_PER_SLOT = 4
MAX_DEPTHS = 8

WIRE_VERSION = 1


@dataclass(frozen=True)
class DobcConfig:
    hash: HashConfig
    slots_per_layer: tuple[int, ...]
    bit_widths: tuple[int, ...]
    decay_mode: str = "complete"
    merge_strategy: str = "maxima"
    hybrid_tracks: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "slots_per_layer", tuple(int(s) for s in self.slots_per_layer))
        object.__setattr__(self, "bit_widths", tuple(int(w) for w in self.bit_widths))
        if len(self.slots_per_layer) != len(self.bit_widths):
            raise ValueError("slots_per_layer and bit_widths must have the same length")
        if not self.slots_per_layer:
            raise ValueError("need at least one layer")
        if any(s < 1 for s in self.slots_per_layer):
            raise ValueError("every layer needs at least one slot")
        for w in self.bit_widths:
            if not 1 <= w <= MAX_BIT_WIDTH:
                raise ValueError(f"bit widths must be in [1, {MAX_BIT_WIDTH}]")
        for a, b in zip(self.bit_widths, self.bit_widths[1:]):
            if b <= a:
                raise ValueError("bit widths must be strictly increasing")
        if self.decay_mode not in DECAY_MODES:
            raise ValueError(f"decay_mode must be one of {DECAY_MODES}")
        if self.merge_strategy not in MERGE_STRATEGIES:
            raise ValueError(f"merge_strategy must be one of {MERGE_STRATEGIES}")
        if self.hybrid_tracks < 1:
            raise ValueError("hybrid_tracks must be >= 1")

    @property
    def num_layers(self) -> int:
        return len(self.slots_per_layer)

    @property
    def slot_caps(self) -> tuple[int, ...]:
        """Unit-filter capacity of a slot at each layer for this decay mode."""
        return _slot_caps(self.bit_widths, self.decay_mode)


@lru_cache(maxsize=None)
def _slot_caps(widths: tuple[int, ...], mode: str) -> tuple[int, ...]:
    caps = [width_cap(widths[0])]
    for prev, cur in zip(widths, widths[1:]):
        if mode == "incomplete":
            caps.append(width_cap(cur))
        else:
            caps.append((width_cap(cur) // width_cap(prev)) * width_cap(prev))
    return tuple(caps)


PAPER_SLOTS = (4, 2, 1)
PAPER_WIDTHS = (1, 2, 3)


def default_config(n: int = 256, m: int = 4, seed: int = 0, **kwargs) -> DobcConfig:
    return DobcConfig(HashConfig(n=n, m=m, seed=seed), PAPER_SLOTS, PAPER_WIDTHS, **kwargs)


@dataclass(frozen=True)
class Slot:
    """One filter plus the lineage-depth intervals it covers.

    ``claims`` holds (lo, hi) depth intervals in the owning track's lineage
    numbering, newest first.  For a never-merged clock there is exactly one
    claim and fill == hi - lo + 1.  Merges may attach additional intervals
    (the other parent's coverage); each claim is individually truthful: the
    filter dominates the sum of the unit filters of the states it names.
    """

    filter: np.ndarray
    fill: int
    claims: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        self.filter.setflags(write=False)

    @property
    def empty(self) -> bool:
        return self.fill == 0


@dataclass(frozen=True)
class Track:
    """One slot grid tracking a single lineage.

    ``depth`` is the lineage's current depth; ``ticks`` the number of unit
    filters this track has absorbed; ``expires`` a master-depth bound after
    which the track is dropped (0 = never; only merge-added tracks expire).
    """

    layers: tuple[tuple[Slot, ...], ...]
    root: bytes
    depth: int
    ticks: int
    expires: int = 0


@dataclass(frozen=True)
class Dobc:
    config: DobcConfig
    tracks: tuple[Track, ...]
    depths: tuple[int, ...]
    # Parallel to depths: master depth at which the entry is dropped
    # (0 = never).  Non-master entries outlive their merge by one window.
    depth_expiry: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if len(self.depth_expiry) != len(self.depths):
            object.__setattr__(self, "depth_expiry", (0,) * len(self.depths))

    @property
    def depth(self) -> int:
        """Deepest lineage depth."""
        return self.depths[0]

    @property
    def depth_set(self) -> frozenset[int]:
        return frozenset(self.depths)

    @property
    def tracked_states(self) -> int:
        """Unit filters currently held by the primary track."""
        return sum(s.fill for layer in self.tracks[0].layers for s in layer)


def _empty_grid(cfg: DobcConfig) -> tuple[tuple[Slot, ...], ...]:
    n = cfg.hash.n
    return tuple(
        tuple(Slot(np.zeros(n, dtype=COUNTER_DTYPE), 0, ()) for _ in range(count))
        for count in cfg.slots_per_layer
    )


def dobc_new(cfg: DobcConfig) -> Dobc:
    """A fresh clock: every slot zero, depth 0, one track."""
    return Dobc(cfg, (Track(_empty_grid(cfg), b"", 0, 0),), (0,), (0,))


# ---------------------------------------------------------------------------
# Tick / decay


def _merge_claims(
    older: tuple[tuple[int, int], ...], newer: tuple[tuple[int, int], ...]
) -> tuple[tuple[int, int], ...]:
    """Join claim lists, fusing intervals that become adjacent."""
    combined = list(older)
    for lo, hi in newer:
        fused = False
        for idx, (clo, chi) in enumerate(combined):
            if chi + 1 == lo:
                combined[idx] = (clo, hi)
                fused = True
                break
            if hi + 1 == clo:
                combined[idx] = (lo, chi)
                fused = True
                break
        if not fused:
            combined.append((lo, hi))
    combined = sorted(set(combined), key=lambda c: (-c[1], -c[0]))
    return tuple(combined[:MAX_CLAIMS_PER_SLOT])


def _absorb(slot: Slot, incoming: Slot, cap_value: int) -> Slot:
    summed = _kernels.saturating_add(slot.filter, incoming.filter, cap_value)
    return Slot(
        np.asarray(summed, dtype=COUNTER_DTYPE),
        slot.fill + incoming.fill,
        _merge_claims(slot.claims, incoming.claims),
    )


def _layer_fill(layer: list[Slot]) -> int:
    return sum(s.fill for s in layer)


def _flush_down(cfg: DobcConfig, layers: list[list[Slot]], lowest: int) -> None:
    """Incomplete decay: push whole layers down wherever doing so fills the
    next layer's head slot to exactly its unit capacity."""
    caps = cfg.slot_caps
    n = cfg.hash.n
    for b in range(cfg.num_layers - 2, max(lowest, 1) - 1, -1):
        total = _layer_fill(layers[b])
        if total == 0:
            continue
        head_below = layers[b + 1][0]
        if total + head_below.fill != caps[b + 1]:
            continue
        cap_value = width_cap(cfg.bit_widths[b + 1])
        for slot in reversed(layers[b]):
            if slot.empty:
                continue
            head_below = _absorb(head_below, slot, cap_value)
        layers[b + 1][0] = head_below
        layers[b] = [Slot(np.zeros(n, dtype=COUNTER_DTYPE), 0, ()) for _ in layers[b]]


def _cascade(cfg: DobcConfig, layers: list[list[Slot]], incoming: Slot) -> int:
    """Insert a unit slot at layer 1 and ripple displacements downward.
    Returns the number of unit filters evicted (deleted) past the last layer."""
    caps = cfg.slot_caps
    incomplete = cfg.decay_mode == "incomplete"
    i = 0
    while i < cfg.num_layers:
        if incomplete and i >= 1:
            _flush_down(cfg, layers, i)
        head = layers[i][0]
        if not head.empty and head.fill + incoming.fill <= caps[i]:
            layers[i][0] = _absorb(head, incoming, width_cap(cfg.bit_widths[i]))
            return 0
        layers[i].insert(0, incoming)
        displaced = layers[i].pop()
        if displaced.empty:
            return 0
        incoming = displaced
        i += 1
    return incoming.fill


def _tick_track(cfg: DobcConfig, track: Track, unit: np.ndarray, digest: bytes) -> Track:
    depth = track.depth + 1
    incoming = Slot(unit, 1, ((depth, depth),))
    layers = [list(layer) for layer in track.layers]
    _cascade(cfg, layers, incoming)
    return Track(
        tuple(tuple(layer) for layer in layers),
        track.root or digest,
        depth,
        track.ticks + 1,
        track.expires,
    )


def dobc_tick(clock: Dobc, digest: bytes) -> Dobc:
    """Record one state transition: the digest's unit filter becomes the head
    of layer 1 in every live track and displaced slots decay downward."""
    cfg = clock.config
    unit = unit_filter(digest, cfg.hash).counters
    new_master = clock.depths[0] + 1
    tracks = tuple(
        _tick_track(cfg, tr, unit, digest)
        for tr in clock.tracks
        if not (tr.expires and new_master >= tr.expires)
    )
    entries = [
        (d + 1, e)
        for d, e in zip(clock.depths, clock.depth_expiry)
        if not (e and new_master >= e)
    ]
    return Dobc(cfg, tracks, tuple(d for d, _ in entries), tuple(e for _, e in entries))


# ---------------------------------------------------------------------------
# Capacity analytics


@dataclass(frozen=True)
class CapacityReport:
    """Closed-form capacity values alongside simulated window statistics."""

    gamma_formula: int
    k_formula: int
    window_min: int
    window_max: int
    window_mean: float
    cycle_length: int


def gamma_formula(cfg: DobcConfig) -> int:
    """Unit states held by a full final-layer slot, per the closed form:
    the product of per-boundary capacity ratios times the layer-1 capacity."""
    widths = cfg.bit_widths
    product = 1
    for a, b in zip(widths, widths[1:]):
        product *= width_cap(b) // width_cap(a)
    return product * width_cap(widths[0])


def k_formula(cfg: DobcConfig) -> int:
    """Total held states per the closed form (layer-1 units plus per-layer
    slot counts weighted by boundary ratios)."""
    widths = cfg.bit_widths
    slots = cfg.slots_per_layer
    total = slots[0] * width_cap(widths[0])
    for i in range(1, len(widths)):
        total += (width_cap(widths[i]) // width_cap(widths[i - 1])) * slots[i]
    return total


def is_perfect_decay(cfg: DobcConfig) -> bool:
    """True iff every layer's capacity is an exact multiple of the previous
    layer's, so no slot space is ever wasted.  Vacuously true for one layer."""
    widths = cfg.bit_widths
    if len(widths) <= 1:
        return True
    return all(width_cap(b) % width_cap(a) == 0 for a, b in zip(widths, widths[1:]))


def capacity_stats(cfg: DobcConfig, ticks: int) -> CapacityReport:
    """Simulate `ticks` transitions with distinct digests and measure the
    steady-state tracked-window statistics.

    Requires enough ticks to observe at least two evictions (one full cycle).
    Post-warmup samples are trimmed to whole eviction cycles so the mean is
    exact, not phase-dependent.
    """
    clock = dobc_new(cfg)
    counts: list[int] = []
    evictions: list[int] = []
    prev = 0
    for t in range(1, ticks + 1):
        clock = dobc_tick(clock, state_digest(b"capacity:%d" % t))
        count = clock.tracked_states
        if count < prev + 1:
            evictions.append(t)
        counts.append(count)
        prev = count
    if len(evictions) < 2:
        raise ValueError("ticks too small: need at least one full eviction cycle")
    cycle = evictions[-1] - evictions[-2]
    start = evictions[0] - 1
    window = counts[start:]
    if cycle > 1:
        window = window[: len(window) - (len(window) % cycle)]
    if not window:
        raise ValueError("ticks too small: no post-warmup samples")
    return CapacityReport(
        gamma_formula=gamma_formula(cfg),
        k_formula=k_formula(cfg),
        window_min=min(window),
        window_max=max(window),
        window_mean=sum(window) / len(window),
        cycle_length=cycle,
    )


@lru_cache(maxsize=None)
def _window_capacity_key(slots: tuple[int, ...], widths: tuple[int, ...], mode: str) -> int:
    cfg = DobcConfig(HashConfig(n=16, m=1, seed=0), slots, widths, decay_mode=mode)
    caps = cfg.slot_caps
    upper = sum(s * c for s, c in zip(slots, caps)) + sum(width_cap(w) for w in widths)
    ticks = 3 * upper + 3 * caps[-1] + 8
    return capacity_stats(cfg, ticks).window_max


def window_capacity(cfg: DobcConfig) -> int:
    """Steady-state maximum number of tracked states (the window size k)."""
    return _window_capacity_key(cfg.slots_per_layer, cfg.bit_widths, cfg.decay_mode)


# ---------------------------------------------------------------------------
# Serialization (canonical wire format: length-prefixed, little-endian)


def _pack_counters(counters: np.ndarray, width: int) -> bytes:
    bits = (counters[:, None].astype(np.uint16) >> np.arange(width, dtype=np.uint16)) & 1
    return np.packbits(bits.astype(np.uint8).ravel(), bitorder="little").tobytes()


def _unpack_counters(data: bytes, n: int, width: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    bits = bits[: n * width].reshape(n, width).astype(np.uint16)
    return (bits << np.arange(width, dtype=np.uint16)).sum(axis=1).astype(COUNTER_DTYPE)


def serialize_clock(clock: Dobc) -> bytes:
    cfg = clock.config
    out = bytearray()
    out += struct.pack("<H", WIRE_VERSION)
    out += struct.pack("<IHQ", cfg.hash.n, cfg.hash.m, cfg.hash.seed)
    out += struct.pack("<B", cfg.num_layers)
    for s, w in zip(cfg.slots_per_layer, cfg.bit_widths):
        out += struct.pack("<HB", s, w)
    out += struct.pack(
        "<BBH",
        DECAY_MODES.index(cfg.decay_mode),
        MERGE_STRATEGIES.index(cfg.merge_strategy),
        cfg.hybrid_tracks,
    )
    out += struct.pack("<H", len(clock.depths))
    for d, e in zip(clock.depths, clock.depth_expiry):
        out += struct.pack("<QQ", d, e)
    out += struct.pack("<H", len(clock.tracks))
    for tr in clock.tracks:
        out += struct.pack("<B", 1 if tr.root else 0)
        out += tr.root if tr.root else b""
        out += struct.pack("<QQQ", tr.depth, tr.ticks, tr.expires)
        for li, layer in enumerate(tr.layers):
            for slot in layer:
                out += struct.pack("<IB", slot.fill, len(slot.claims))
                for lo, hi in slot.claims:
                    out += struct.pack("<QQ", lo, hi)
                out += _pack_counters(slot.filter, cfg.bit_widths[li])
    return struct.pack("<I", len(out)) + bytes(out)


def deserialize_clock(data: bytes) -> Dobc:
    (total,) = struct.unpack_from("<I", data, 0)
    if total != len(data) - 4:
        raise ValueError("length prefix mismatch")
    off = 4
    (version,) = struct.unpack_from("<H", data, off)
    off += 2
    if version != WIRE_VERSION:
        raise ValueError(f"unsupported wire version {version}")
    n, m, seed = struct.unpack_from("<IHQ", data, off)
    off += 14
    (num_layers,) = struct.unpack_from("<B", data, off)
    off += 1
    slots, widths = [], []
    for _ in range(num_layers):
        s, w = struct.unpack_from("<HB", data, off)
        off += 3
        slots.append(s)
        widths.append(w)
    decay_i, strat_i, hybrid_p = struct.unpack_from("<BBH", data, off)
    off += 4
    cfg = DobcConfig(
        HashConfig(n=n, m=m, seed=seed),
        tuple(slots),
        tuple(widths),
        decay_mode=DECAY_MODES[decay_i],
        merge_strategy=MERGE_STRATEGIES[strat_i],
        hybrid_tracks=hybrid_p,
    )
    (depth_count,) = struct.unpack_from("<H", data, off)
    off += 2
    depths = []
    depth_expiry = []
    for _ in range(depth_count):
        d, e = struct.unpack_from("<QQ", data, off)
        off += 16
        depths.append(d)
        depth_expiry.append(e)
    (track_count,) = struct.unpack_from("<H", data, off)
    off += 2
    packed_len = [(n * w + 7) // 8 for w in widths]
    tracks = []
    for _ in range(track_count):
        (has_root,) = struct.unpack_from("<B", data, off)
        off += 1
        root = b""
        if has_root:
            root = data[off : off + DIGEST_SIZE]
            off += DIGEST_SIZE
        depth, ticks, expires = struct.unpack_from("<QQQ", data, off)
        off += 24
        layers = []
        for li in range(num_layers):
            layer = []
            for _ in range(slots[li]):
                fill, claim_count = struct.unpack_from("<IB", data, off)
                off += 5
                claims = []
                for _ in range(claim_count):
                    lo, hi = struct.unpack_from("<QQ", data, off)
                    off += 16
                    claims.append((lo, hi))
                counters = _unpack_counters(data[off : off + packed_len[li]], n, widths[li])
                off += packed_len[li]
                layer.append(Slot(counters, fill, tuple(claims)))
            layers.append(tuple(layer))
        tracks.append(Track(tuple(layers), root, depth, ticks, expires))
    if off != len(data):
        raise ValueError("trailing bytes in clock serialization")
    return Dobc(cfg, tuple(tracks), tuple(depths), tuple(depth_expiry))


def clocks_equal(a: Dobc, b: Dobc) -> bool:
    if a is b:
        return True
    if a.config != b.config or a.depths != b.depths or len(a.tracks) != len(b.tracks):
        return False
    if a.depth_expiry != b.depth_expiry:
        return False
    for ta, tb in zip(a.tracks, b.tracks):
        if (ta.root, ta.depth, ta.ticks, ta.expires) != (tb.root, tb.depth, tb.ticks, tb.expires):
            return False
        for la, lb in zip(ta.layers, tb.layers):
            for sa, sb in zip(la, lb):
                if sa.fill != sb.fill or sa.claims != sb.claims:
                    return False
                if not np.array_equal(sa.filter, sb.filter):
                    return False
    return True


# ---------------------------------------------------------------------------
# Merging


def _canonical_pair(a: Dobc, b: Dobc) -> tuple[Dobc, Dobc]:
    """Deterministic operand order so merging is commutative."""
    ka = (-a.depths[0], serialize_clock(a))
    kb = (-b.depths[0], serialize_clock(b))
    return (a, b) if ka <= kb else (b, a)


def _sorted_tracks(tracks: tuple[Track, ...]) -> list[Track]:
    def key(tr: Track):
        fills = tuple(s.fill for layer in tr.layers for s in layer)
        return (-tr.depth, -tr.ticks, tr.root, fills)

    return sorted(tracks, key=key)


def _fold_tracks(cfg: DobcConfig, anchor: Track, other: Track) -> Track:
    """Positional per-index maxima of two tracks.

    The deeper track anchors the structure and keeps its claims; the other
    track contributes counters only.  Carrying the other lineage's intervals
    on maxed slots would let later comparisons align against content the
    fold does not guarantee to dominate, breaking one-sided error; dropping
    them merely shrinks the set of alignable intervals.
    """
    layers = []
    for la, lb in zip(anchor.layers, other.layers):
        layer = []
        for sa, sb in zip(la, lb):
            filt = np.maximum(sa.filter, sb.filter)
            layer.append(Slot(filt, max(sa.fill, sb.fill), sa.claims))
        layers.append(tuple(layer))
    expires = 0
    if anchor.expires and other.expires:
        expires = max(anchor.expires, other.expires)
    elif anchor.expires or other.expires:
        expires = 0 if not anchor.expires else anchor.expires
    return Track(
        tuple(layers),
        anchor.root,
        anchor.depth,
        max(anchor.ticks, other.ticks),
        expires,
    )


def _merged_depths(a: Dobc, b: Dobc, horizon: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Union of the operands' depth entries.  Entries that stop being the
    master are stamped to expire one window past this merge."""
    entries: dict[int, int] = {}
    for clock in (a, b):
        for value, expiry in zip(clock.depths, clock.depth_expiry):
            if value in entries:
                old = entries[value]
                entries[value] = 0 if (old == 0 or expiry == 0) else max(old, expiry)
            else:
                entries[value] = expiry
    master = max(entries)
    stamp = master + horizon + 1
    ordered = sorted(entries, reverse=True)[:MAX_DEPTHS]
    expiries = []
    for value in ordered:
        if value == master:
            expiries.append(0)
        elif entries[value] == 0:
            expiries.append(stamp)
        else:
            expiries.append(entries[value])
    return tuple(ordered), tuple(expiries)


def merge_anchor_index(a: Dobc, b: Dobc) -> int:
    """Which operand's primary track anchors a fold of these clocks (0 or 1).

    The anchor keeps its claims through maxima folds; the other operand
    contributes counters only.  Deeper clock wins, ties break on canonical
    serialization order.
    """
    first, _second = _canonical_pair(a, b)
    return 0 if first is a else 1


def dobc_merge(a: Dobc, b: Dobc, strategy: str | None = None) -> Dobc:
    """Join two clocks of the same configuration.

    The result's depth set is the union of the operands'; the caller (the
    object layer) ticks the merged clock with the child state's digest,
    which advances every depth by one.
    """
    if a.config != b.config:
        raise ValueError("clock config mismatch")
    cfg = a.config
    strategy = strategy or cfg.merge_strategy
    if strategy not in MERGE_STRATEGIES:
        raise ValueError(f"unknown merge strategy {strategy!r}")
    horizon = window_capacity(cfg)
    first, second = _canonical_pair(a, b)
    depths, depth_expiry = _merged_depths(a, b, horizon)
    tracks = _sorted_tracks(first.tracks + second.tracks)

    if strategy == "maxima":
        folded = tracks[0]
        for tr in tracks[1:]:
            folded = _fold_tracks(cfg, folded, tr)
        folded = replace(folded, expires=0)
        return Dobc(cfg, (folded,), depths, depth_expiry)

    # Extending keeps all tracks; hybrid folds the oldest down to the budget.
    expiry = depths[0] + horizon + 1
    stamped = [replace(tracks[0], expires=0)]
    for tr in tracks[1:]:
        exp = tr.expires if tr.expires and tr.expires < expiry else expiry
        stamped.append(replace(tr, expires=exp))
    if strategy == "hybrid":
        while len(stamped) > cfg.hybrid_tracks:
            other = stamped.pop()
            anchor = stamped.pop()
            folded = _fold_tracks(cfg, anchor, other)
            if len(stamped) == 0:
                folded = replace(folded, expires=0)
            stamped.append(folded)
    return Dobc(cfg, tuple(stamped), depths, depth_expiry)


# ---------------------------------------------------------------------------
# Comparison


class TrackView:
    """Precomputed alignment index for one track: slot filters stacked into a
    matrix, claims mapped to rows, chain sums cached."""

    __slots__ = ("root", "depth", "matrix", "segments", "by_lo", "_sum_cache", "caps")

    def __init__(self, cfg: DobcConfig, track: Track):
        self.root = track.root
        self.depth = track.depth
        rows = []
        segments = []  # (lo, hi, row)
        caps = []
        for li, layer in enumerate(track.layers):
            cap = width_cap(cfg.bit_widths[li])
            for slot in layer:
                if slot.empty:
                    continue
                row = len(rows)
                rows.append(slot.filter)
                caps.append(min(slot.fill, cap))
                for lo, hi in slot.claims:
                    segments.append((lo, hi, row))
        self.matrix = (
            np.stack(rows) if rows else np.zeros((0, cfg.hash.n), COUNTER_DTYPE)
        )
        self.caps = caps
        self.segments = segments
        by_lo: dict[int, list[tuple[int, int]]] = {}
        for lo, hi, row in segments:
            by_lo.setdefault(lo, []).append((hi, row))
        self.by_lo = by_lo
        self._sum_cache: dict[tuple[int, int], list[tuple[np.ndarray, int]]] = {}

    def covers(self, lo: int, hi: int) -> list[tuple[np.ndarray, int]]:
        """Every exact cover of [lo, hi] by a chain of adjacent claims,
        as (summed counters, saturation ceiling) pairs."""
        key = (lo, hi)
        cached = self._sum_cache.get(key)
        if cached is not None:
            return cached
        results: list[tuple[np.ndarray, int]] = []
        stack: list[tuple[int, list[int]]] = [(lo, [])]
        while stack and len(results) < 8:
            cursor, rows = stack.pop()
            for seg_hi, row in self.by_lo.get(cursor, ()):
                if seg_hi > hi:
                    continue
                chain = rows + [row]
                if seg_hi == hi:
                    total = self.matrix[chain[0]].astype(np.int64)
                    ceil = self.caps[chain[0]]
                    for r in chain[1:]:
                        total += self.matrix[r]
                        ceil += self.caps[r]
                    results.append((total, ceil))
                else:
                    stack.append((seg_hi + 1, chain))
        if len(self._sum_cache) >= 64:
            self._sum_cache.pop(next(iter(self._sum_cache)))
        self._sum_cache[key] = results
        return results


def _interval_checks(
    side_a: TrackView, side_b: TrackView
) -> tuple[bool, bool, bool]:
    """Scan b's claimed intervals against a's covers.  Returns
    (any_aligned, a_dominates_all, b_dominates_all) over those intervals."""
    aligned = False
    a_ge = True
    b_ge = True
    seen: set[tuple[int, int]] = set()
    for lo, hi, row in side_b.segments:
        if (lo, hi) in seen:
            continue
        seen.add((lo, hi))
        covers = side_a.covers(lo, hi)
        if not covers:
            continue
        aligned = True
        b_covers = side_b.covers(lo, hi)
        if a_ge and not any(
            bool(np.all((ca >= cb) | (ca >= ceil_a)))
            for ca, ceil_a in covers
            for cb, _ in b_covers
        ):
            a_ge = False
        if b_ge and not any(
            bool(np.all((cb >= ca) | (cb >= ceil_b)))
            for cb, ceil_b in b_covers
            for ca, _ in covers
        ):
            b_ge = False
    return aligned, a_ge, b_ge


def _pair_verdict(va: TrackView, vb: TrackView) -> CausalVerdict:
    if not va.root or va.root != vb.root:
        return CausalVerdict.INDETERMINATE
    aligned1, a_ge1, b_ge1 = _interval_checks(va, vb)
    aligned2, b_ge2, a_ge2 = _interval_checks(vb, va)
    if not (aligned1 or aligned2):
        return CausalVerdict.INDETERMINATE
    a_ge = a_ge1 and a_ge2
    b_ge = b_ge1 and b_ge2
    if a_ge and b_ge:
        if va.depth > vb.depth:
            return CausalVerdict.STRICTLY_AFTER
        if vb.depth > va.depth:
            return CausalVerdict.STRICTLY_BEFORE
        return CausalVerdict.AFTER_OR_EQUAL
    if a_ge and va.depth > vb.depth:
        return CausalVerdict.STRICTLY_AFTER
    if b_ge and vb.depth > va.depth:
        return CausalVerdict.STRICTLY_BEFORE
    return CausalVerdict.CONCURRENT


def clock_views(clock: Dobc) -> list[TrackView]:
    return [TrackView(clock.config, tr) for tr in clock.tracks]


def compare_views(views_a: list[TrackView], views_b: list[TrackView]) -> CausalVerdict:
    """Combine per-track-pair verdicts.  Each track is a valid lineage, so a
    causal verdict from any pair stands unless another pair contradicts it."""
    verdicts = [_pair_verdict(va, vb) for va in views_a for vb in views_b]
    after = any(v is CausalVerdict.STRICTLY_AFTER for v in verdicts)
    before = any(v is CausalVerdict.STRICTLY_BEFORE for v in verdicts)
    aoe = any(v is CausalVerdict.AFTER_OR_EQUAL for v in verdicts)
    boe = any(v is CausalVerdict.BEFORE_OR_EQUAL for v in verdicts)
    if (after or aoe) and (before or boe):
        return CausalVerdict.CONCURRENT
    if after:
        return CausalVerdict.STRICTLY_AFTER
    if before:
        return CausalVerdict.STRICTLY_BEFORE
    if aoe:
        return CausalVerdict.AFTER_OR_EQUAL
    if boe:
        return CausalVerdict.BEFORE_OR_EQUAL
    if all(v is CausalVerdict.INDETERMINATE for v in verdicts):
        return CausalVerdict.INDETERMINATE
    return CausalVerdict.CONCURRENT


def dobc_compare(a: Dobc, b: Dobc) -> CausalVerdict:
    """Verdict for a relative to b."""
    if a.config != b.config:
        raise ValueError("clock config mismatch")
    if clocks_equal(a, b):
        return CausalVerdict.AFTER_OR_EQUAL
    return compare_views(clock_views(a), clock_views(b))
