"""Object algebra: immutable (state, clock, depth set) tuples produced by
``create`` and ``mutate`` over a registry of named pure mutation functions.

A created object starts a fresh clock and ticks it once with its own digest,
so the clock's newest slot always covers the object's own state.  A mutation
ticks the parent clock with the child digest; a two-parent mutation first
merges the parent clocks under the configured strategy.  Parent order is
canonicalized so merging the same pair on different nodes yields
bit-identical children.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from .dag import DerivationDag
from .dobc import Dobc, DobcConfig, default_config, dobc_merge, dobc_new, dobc_tick, serialize_clock
from .hashing import state_digest

MutationFn = Callable[[bytes, tuple[bytes, ...]], bytes]


@dataclass(frozen=True)
class Mutation:
    fn_id: int
    name: str
    fn: MutationFn
    arity: int


class MutationRegistry:
    """Ordered, densely-numbered registry of pure mutation functions.

    Each function maps (params, input states) -> output state and must be
    deterministic.  ``params`` are opaque bytes recorded alongside the step
    so a verifier can re-execute it.
    """

    def __init__(self) -> None:
        self._by_id: list[Mutation] = []
        self._by_name: dict[str, Mutation] = {}

    def register(self, name: str, fn: MutationFn, arity: int) -> int:
        if name in self._by_name:
            raise ValueError(f"duplicate mutation name {name!r}")
        if arity not in (1, 2):
            raise ValueError("arity must be 1 or 2")
        fn_id = len(self._by_id)
        mut = Mutation(fn_id, name, fn, arity)
        self._by_id.append(mut)
        self._by_name[name] = mut
        return fn_id

    def get(self, fn_id: int) -> Mutation:
        if not 0 <= fn_id < len(self._by_id):
            raise KeyError(f"unknown mutation id {fn_id}")
        return self._by_id[fn_id]

    def by_name(self, name: str) -> Mutation:
        try:
            return self._by_name[name]
        except KeyError:
            raise KeyError(f"unknown mutation name {name!r}") from None

    def __len__(self) -> int:
        return len(self._by_id)


def _set_value(params: bytes, states: tuple[bytes, ...]) -> bytes:
    return params


def _derive(params: bytes, states: tuple[bytes, ...]) -> bytes:
    return state_digest(b"derive|" + params + b"|" + states[0])


def _max_merge(params: bytes, states: tuple[bytes, ...]) -> bytes:
    return max(states)


def _union_merge(params: bytes, states: tuple[bytes, ...]) -> bytes:
    tokens = set()
    for s in states:
        tokens.update(t for t in s.split(b",") if t)
    return b",".join(sorted(tokens))


def _mix_merge(params: bytes, states: tuple[bytes, ...]) -> bytes:
    lo, hi = sorted(states)
    return state_digest(b"mix|" + params + b"|" + lo + b"|" + hi)


def default_registry() -> MutationRegistry:
    """The stock registry: set_value(0), derive(1), max_merge(2),
    union_merge(3), mix_merge(4)."""
    reg = MutationRegistry()
    reg.register("set_value", _set_value, 1)
    reg.register("derive", _derive, 1)
    reg.register("max_merge", _max_merge, 2)
    reg.register("union_merge", _union_merge, 2)
    reg.register("mix_merge", _mix_merge, 2)
    return reg


@dataclass(frozen=True)
class Obj:
    """One immutable object: opaque state, its digest, its clock, and an
    optional oracle handle (not part of the wire identity)."""

    state: bytes
    digest: bytes
    clock: Dobc
    lineage_id: int = -1

    @property
    def depths(self) -> tuple[int, ...]:
        return self.clock.depths

    @property
    def depth(self) -> int:
        return self.clock.depth

    def wire_bytes(self) -> bytes:
        clock_bytes = serialize_clock(self.clock)
        return (
            len(self.state).to_bytes(4, "little")
            + self.state
            + len(clock_bytes).to_bytes(4, "little")
            + clock_bytes
        )


def create(
    state: bytes,
    config: Optional[DobcConfig] = None,
    dag: Optional[DerivationDag] = None,
    creator: int = 0,
) -> Obj:
    """Genesis object: fresh clock ticked once with the object's own digest."""
    cfg = config or default_config()
    digest = state_digest(state)
    clock = dobc_tick(dobc_new(cfg), digest)
    lineage = dag.add_create(digest, creator) if dag is not None else -1
    return Obj(state, digest, clock, lineage)


def mutate(
    registry: MutationRegistry,
    fn_id: int,
    parents: tuple[Obj, ...] | list[Obj],
    params: bytes = b"",
    dag: Optional[DerivationDag] = None,
    creator: int = 0,
) -> Obj:
    """Apply a registered mutation to one or two parent objects."""
    mut = registry.get(fn_id)
    parents = tuple(parents)
    if len(parents) != mut.arity:
        raise ValueError(
            f"mutation {mut.name!r} takes {mut.arity} parent(s), got {len(parents)}"
        )
    if mut.arity == 2:
        parents = canonical_parents(parents)
        base_clock = dobc_merge(parents[0].clock, parents[1].clock)
    else:
        base_clock = parents[0].clock
    state = mut.fn(params, tuple(p.state for p in parents))
    digest = state_digest(state)
    clock = dobc_tick(base_clock, digest)
    lineage = -1
    if dag is not None:
        if any(p.lineage_id < 0 for p in parents):
            raise ValueError("parents lack oracle handles")
        lineage = dag.add_mutate(digest, tuple(p.lineage_id for p in parents), creator)
    return Obj(state, digest, clock, lineage)


def canonical_parents(parents: tuple[Obj, ...]) -> tuple[Obj, ...]:
    """Order-insensitive parent ordering so replicas merging the same pair
    produce bit-identical children."""
    return tuple(sorted(parents, key=lambda o: (o.digest, serialize_clock(o.clock))))
