"""Deterministic discrete-event simulation of a replicated key-value store.

Nodes sit on a consistent-hash ring; every key lives on the R closest nodes.
Clients insert, update, and get.  Writes are applied at one replica and
forwarded: a receiver first verifies the attached history proof, then uses
clock comparison to ignore stale objects, replace dominated ones, and merge
concurrent ones with the key's stored merge function.  A periodic anti-entropy
round exchanges clock digests with a random group peer and pulls anything
unknown or diverged, which is what makes convergence survive message loss.

Everything runs off a single seeded event queue: identical (scenario, seed)
inputs produce byte-identical stores, reports, and logs.  Fault injection
covers message drops, random delays (reordering), timed partitions, and
Byzantine nodes that tamper with outgoing clocks (honest verifiers reject
them on receipt).
"""

from __future__ import annotations

import configparser
import heapq
import random
import struct
from dataclasses import dataclass
from pathlib import Path

from .dobc import DobcConfig, HashConfig, deserialize_clock, dobc_compare, serialize_clock
from .hashing import state_digest
from .objects import MutationRegistry, Obj, canonical_parents, create, default_registry, mutate
from .proofs import (
    TranscriptProof,
    deserialize_proof,
    prove_genesis,
    prove_step,
    serialize_proof,
    verify,
)
from .ring import Ring
from .verdicts import CausalVerdict


@dataclass(frozen=True)
class ScenarioSpec:
    nodes: int = 4
    vnodes: int = 64
    replicas: int = 3
    anti_entropy_period: int = 1000
    ops: int = 50
    keys: int = 8
    update_ratio: float = 0.6
    get_ratio: float = 0.2
    merge_fn: str = "max_merge"
    seed: int = 0
    drop_rate: float = 0.0
    delay_min: int = 10
    delay_max: int = 100
    partitions: tuple[tuple[int, int, frozenset[int], frozenset[int]], ...] = ()
    byzantine: frozenset[int] = frozenset()
    clock_n: int = 256
    clock_m: int = 4
    clock_seed: int = 0
    layers: tuple[int, ...] = (4, 2, 1)
    widths: tuple[int, ...] = (1, 2, 3)
    decay_mode: str = "complete"
    merge_strategy: str = "maxima"
    hybrid_tracks: int = 2
    max_rounds: int = 60

    def clock_config(self) -> DobcConfig:
        return DobcConfig(
            HashConfig(self.clock_n, self.clock_m, self.clock_seed),
            self.layers,
            self.widths,
            decay_mode=self.decay_mode,
            merge_strategy=self.merge_strategy,
            hybrid_tracks=self.hybrid_tracks,
        )


_SCENARIO_KEYS = {
    "ring": {"nodes", "vnodes", "r", "anti_entropy_period"},
    "workload": {"ops", "keys", "update_ratio", "get_ratio", "merge_fn", "seed"},
    "faults": {"drop_rate", "delay", "partition", "byzantine"},
    "clock": {
        "n", "m", "seed", "layers", "widths", "decay_mode", "merge_strategy",
        "hybrid_tracks", "max_rounds",
    },
}


def _parse_int_list(text: str) -> tuple[int, ...]:
    return tuple(int(x) for x in text.replace(" ", "").split(",") if x)


def parse_scenario(path: str | Path) -> ScenarioSpec:
    """Load a line-oriented `key = value` scenario file with sections
    [ring], [workload], [faults], [clock].  Unknown keys are rejected."""
    parser = configparser.ConfigParser()
    text = Path(path).read_text()
    parser.read_string(text)
    kwargs: dict = {}
    for section in parser.sections():
        if section not in _SCENARIO_KEYS:
            raise ValueError(f"unknown scenario section [{section}]")
        for key in parser[section]:
            if key not in _SCENARIO_KEYS[section]:
                raise ValueError(f"unknown scenario key {key!r} in [{section}]")
    ring = parser["ring"] if parser.has_section("ring") else {}
    if "nodes" in ring:
        kwargs["nodes"] = int(ring["nodes"])
    if "vnodes" in ring:
        kwargs["vnodes"] = int(ring["vnodes"])
    if "r" in ring:
        kwargs["replicas"] = int(ring["r"])
    if "anti_entropy_period" in ring:
        kwargs["anti_entropy_period"] = int(ring["anti_entropy_period"])
    wl = parser["workload"] if parser.has_section("workload") else {}
    for key, attr, conv in (
        ("ops", "ops", int),
        ("keys", "keys", int),
        ("update_ratio", "update_ratio", float),
        ("get_ratio", "get_ratio", float),
        ("merge_fn", "merge_fn", str),
        ("seed", "seed", int),
    ):
        if key in wl:
            kwargs[attr] = conv(wl[key])
    faults = parser["faults"] if parser.has_section("faults") else {}
    if "drop_rate" in faults:
        kwargs["drop_rate"] = float(faults["drop_rate"])
    if "delay" in faults:
        lo, hi = faults["delay"].split("-")
        kwargs["delay_min"], kwargs["delay_max"] = int(lo), int(hi)
    if "partition" in faults:
        windows = []
        for part in faults["partition"].split(";"):
            part = part.strip()
            if not part:
                continue
            window, groups = part.split(":")
            start, end = window.split("-")
            a, b = groups.split("|")
            windows.append(
                (int(start), int(end), frozenset(_parse_int_list(a)), frozenset(_parse_int_list(b)))
            )
        kwargs["partitions"] = tuple(windows)
    if "byzantine" in faults:
        kwargs["byzantine"] = frozenset(_parse_int_list(faults["byzantine"]))
    clock = parser["clock"] if parser.has_section("clock") else {}
    for key, attr, conv in (
        ("n", "clock_n", int),
        ("m", "clock_m", int),
        ("seed", "clock_seed", int),
        ("decay_mode", "decay_mode", str),
        ("merge_strategy", "merge_strategy", str),
        ("hybrid_tracks", "hybrid_tracks", int),
        ("max_rounds", "max_rounds", int),
    ):
        if key in clock:
            kwargs[attr] = conv(clock[key])
    if "layers" in clock:
        kwargs["layers"] = _parse_int_list(clock["layers"])
    if "widths" in clock:
        kwargs["widths"] = _parse_int_list(clock["widths"])
    return ScenarioSpec(**kwargs)


@dataclass
class StoredEntry:
    key: bytes
    obj: Obj
    proof: TranscriptProof
    merge_fn_id: int


@dataclass
class SimReport:
    converged: bool
    rounds_to_converge: int
    messages: int
    rejected_count: int
    divergence_keys: tuple[str, ...]
    get_results: tuple[tuple[str, str], ...] = ()

    @staticmethod
    def csv_header() -> str:
        return "seed,converged,rounds_to_converge,messages,rejected_count,divergence_keys"

    def csv_row(self, seed: int) -> str:
        keys = "|".join(self.divergence_keys)
        return (
            f"{seed},{int(self.converged)},{self.rounds_to_converge},"
            f"{self.messages},{self.rejected_count},{keys}"
        )


def check_merge_fn(registry: MutationRegistry, fn_id: int, rng: random.Random) -> None:
    """Reject merge functions that are not commutative and idempotent on
    sampled inputs; convergence cannot be order-insensitive without both."""
    mut = registry.get(fn_id)
    if mut.arity != 2:
        raise ValueError(f"merge function {mut.name!r} must be binary")
    for _ in range(16):
        a = b"%d" % rng.randrange(1 << 30)
        b = b"%d" % rng.randrange(1 << 30)
        if mut.fn(b"", (a, b)) != mut.fn(b"", (b, a)):
            raise ValueError(f"merge function {mut.name!r} is not commutative")
        if mut.fn(b"", (a, a)) != a:
            raise ValueError(f"merge function {mut.name!r} is not idempotent")


class SimWorld:
    """One simulated network: event queue, per-node stores, fault injectors."""

    def __init__(self, spec: ScenarioSpec, registry: MutationRegistry | None = None):
        self.spec = spec
        self.registry = registry or default_registry()
        self.config = spec.clock_config()
        self.rng = random.Random(spec.seed)
        self.ring = Ring(list(range(spec.nodes)), spec.vnodes)
        self.stores: list[dict[bytes, StoredEntry]] = [dict() for _ in range(spec.nodes)]
        self.queue: list[tuple[int, int, str, tuple]] = []
        self._seq = 0
        self.now = 0
        self.messages_delivered = 0
        self.rejected_count = 0
        self.log: list[str] = []
        self.get_results: list[tuple[str, str]] = []
        self.merge_fn_id = self.registry.by_name(spec.merge_fn).fn_id
        check_merge_fn(self.registry, self.merge_fn_id, random.Random(spec.seed ^ 0xC0FFEE))
        self.update_fn_id = self.registry.by_name("set_value").fn_id

    # -- event plumbing -----------------------------------------------------

    def _push(self, at: int, kind: str, payload: tuple) -> None:
        heapq.heappush(self.queue, (at, self._seq, kind, payload))
        self._seq += 1

    def _partitioned(self, src: int, dst: int, at: int) -> bool:
        for start, end, side_a, side_b in self.spec.partitions:
            if start <= at < end:
                if (src in side_a and dst in side_b) or (src in side_b and dst in side_a):
                    return True
        return False

    def _send(self, src: int, dst: int, payload: tuple) -> None:
        if src == dst:
            return
        delay = self.rng.randint(self.spec.delay_min, self.spec.delay_max)
        at = self.now + delay
        if self.rng.random() < self.spec.drop_rate:
            self.log.append(f"t={self.now} drop {src}->{dst} {payload[0]}")
            return
        if self._partitioned(src, dst, at):
            self.log.append(f"t={self.now} partitioned {src}->{dst} {payload[0]}")
            return
        self._push(at, "msg", (src, dst, payload))

    # -- client operations ----------------------------------------------------

    def client_insert(self, key: bytes, value: bytes) -> None:
        group = self.ring.replica_group(key, self.spec.replicas)
        target = group[0]
        obj = create(value, self.config)
        proof = prove_genesis(obj)
        entry = StoredEntry(key, obj, proof, self.merge_fn_id)
        self.stores[target][key] = entry
        self.log.append(f"t={self.now} insert {key.decode()} at {target}")
        self._forward(target, key, entry)

    def client_update(self, key: bytes, value: bytes) -> None:
        group = self.ring.replica_group(key, self.spec.replicas)
        target = None
        for node in group:
            if key in self.stores[node]:
                target = node
                break
        if target is None:
            self.log.append(f"t={self.now} update {key.decode()} failed: no replica holds key")
            return
        local = self.stores[target][key]
        child = mutate(self.registry, self.update_fn_id, (local.obj,), value)
        proof = prove_step((local.proof,), self.update_fn_id, value, (local.obj,), child)
        entry = StoredEntry(key, child, proof, local.merge_fn_id)
        self.stores[target][key] = entry
        self.log.append(f"t={self.now} update {key.decode()} at {target}")
        self._forward(target, key, entry)

    def client_get(self, key: bytes) -> bytes | None:
        group = self.ring.replica_group(key, self.spec.replicas)
        for node in group:
            entry = self.stores[node].get(key)
            if entry is not None:
                self.log.append(f"t={self.now} get {key.decode()} -> {entry.obj.state.decode()}")
                self.get_results.append((key.decode(), entry.obj.state.decode()))
                return entry.obj.state
        self.log.append(f"t={self.now} get {key.decode()} -> missing")
        self.get_results.append((key.decode(), ""))
        return None

    # -- replication ----------------------------------------------------------

    def _wire_entry(self, src: int, entry: StoredEntry) -> tuple:
        obj_bytes = entry.obj.state, serialize_clock(entry.obj.clock)
        proof_bytes = serialize_proof(entry.proof)
        if src in self.spec.byzantine:
            clock = bytearray(obj_bytes[1])
            # flip one counter byte in the clock section
            pos = len(clock) - 1 - self.rng.randrange(min(64, len(clock)))
            clock[pos] ^= 0x55
            obj_bytes = (obj_bytes[0], bytes(clock))
        return (entry.key, obj_bytes[0], obj_bytes[1], proof_bytes, entry.merge_fn_id)

    def _forward(self, src: int, key: bytes, entry: StoredEntry) -> None:
        for peer in self.ring.replica_group(key, self.spec.replicas):
            if peer != src:
                self._send(src, peer, ("store", self._wire_entry(src, entry)))

    def replica_on_receive(self, node: int, wire: tuple) -> str:
        """Apply the receive rule to an incoming (key, object, proof) and
        return the action taken: reject, store, ignore, replace, or merge."""
        key, state, clock_bytes, proof_bytes, merge_fn_id = wire
        try:
            clock = deserialize_clock(clock_bytes)
            proof = deserialize_proof(proof_bytes)
        except (ValueError, IndexError, KeyError, struct.error):
            self.rejected_count += 1
            self.log.append(f"t={self.now} node {node} rejects {key.decode()}: undecodable")
            return "reject"
        incoming = Obj(state, state_digest(state), clock)
        if not verify(incoming, proof, self.registry, self.config):
            self.rejected_count += 1
            self.log.append(f"t={self.now} node {node} rejects {key.decode()}: proof")
            return "reject"
        local = self.stores[node].get(key)
        if local is None:
            self.stores[node][key] = StoredEntry(key, incoming, proof, merge_fn_id)
            self.log.append(f"t={self.now} node {node} stores {key.decode()} (new)")
            return "store"
        action = self._receive_action(incoming, local.obj)
        if action == "ignore":
            return "ignore"
        if action == "replace":
            self.stores[node][key] = StoredEntry(key, incoming, proof, local.merge_fn_id)
            self.log.append(f"t={self.now} node {node} replaces {key.decode()}")
            self._forward(node, key, self.stores[node][key])
            return "replace"
        # concurrent or indeterminate: merge with the stored function
        parents = canonical_parents((incoming, local.obj))
        proofs = (proof, local.proof) if parents[0] is incoming else (local.proof, proof)
        child = mutate(self.registry, local.merge_fn_id, parents, b"")
        child_proof = prove_step(proofs, local.merge_fn_id, b"", parents, child)
        self.stores[node][key] = StoredEntry(key, child, child_proof, local.merge_fn_id)
        self.log.append(f"t={self.now} node {node} merges {key.decode()}")
        self._forward(node, key, self.stores[node][key])
        return "merge"

    def _receive_action(self, incoming: Obj, local: Obj) -> str:
        if serialize_clock(incoming.clock) == serialize_clock(local.clock):
            return "ignore"
        verdict = dobc_compare(incoming.clock, local.clock)
        if verdict in (CausalVerdict.STRICTLY_BEFORE, CausalVerdict.BEFORE_OR_EQUAL):
            return "ignore"
        if verdict in (CausalVerdict.STRICTLY_AFTER, CausalVerdict.AFTER_OR_EQUAL):
            return "replace"
        return "merge"

    # -- anti-entropy -----------------------------------------------------------

    def _on_ae_tick(self, node: int) -> None:
        store = self.stores[node]
        if store:
            peers = sorted(
                {
                    p
                    for key in store
                    for p in self.ring.replica_group(key, self.spec.replicas)
                    if p != node
                }
            )
            if peers:
                peer = peers[self.rng.randrange(len(peers))]
                digest_list = tuple(
                    sorted((key, serialize_clock(e.obj.clock)) for key, e in store.items())
                )
                self._send(node, peer, ("ae_digest", node, digest_list))
        self._push(self.now + self.spec.anti_entropy_period, "ae", (node,))

    def _on_ae_digest(self, node: int, src: int, digests: tuple) -> None:
        wanted = []
        for key, clock_bytes in digests:
            if node not in self.ring.replica_group(key, self.spec.replicas):
                continue
            local = self.stores[node].get(key)
            if local is None or serialize_clock(local.obj.clock) != clock_bytes:
                wanted.append(key)
        if wanted:
            self._send(node, src, ("ae_request", node, tuple(wanted)))

    def _on_ae_request(self, node: int, src: int, keys: tuple) -> None:
        for key in keys:
            entry = self.stores[node].get(key)
            if entry is not None:
                self._send(node, src, ("store", self._wire_entry(node, entry)))

    # -- main loop ----------------------------------------------------------------

    def _honest(self) -> list[int]:
        return [n for n in range(self.spec.nodes) if n not in self.spec.byzantine]

    def divergent_keys(self) -> list[str]:
        """Keys whose honest replica-group members disagree (or miss the key)."""
        all_keys = sorted({k for store in self.stores for k in store})
        out = []
        for key in all_keys:
            group = [
                n for n in self.ring.replica_group(key, self.spec.replicas)
                if n not in self.spec.byzantine
            ]
            wires = []
            for n in group:
                entry = self.stores[n].get(key)
                wires.append(entry.obj.wire_bytes() if entry else b"")
            if len(set(wires)) > 1:
                out.append(key.decode())
        return out

    def run(self) -> SimReport:
        spec = self.spec
        rng = random.Random(spec.seed ^ 0xD1CE)
        keys = [b"key%03d" % i for i in range(spec.keys)]
        at = 0
        for i, key in enumerate(keys):
            at += rng.randint(50, 150)
            self._push(at, "client", ("insert", key, b"v0:%s" % key))
        for op in range(spec.ops):
            at += rng.randint(20, 200)
            roll = rng.random()
            key = keys[rng.randrange(len(keys))]
            if roll < spec.update_ratio:
                self._push(at, "client", ("update", key, b"v%d" % (op + 1)))
            elif roll < spec.update_ratio + spec.get_ratio:
                self._push(at, "client", ("get", key, b""))
            else:
                self._push(at, "client", ("insert", key, b"vi%d" % (op + 1)))
        workload_end = at
        for node in range(spec.nodes):
            self._push(workload_end + spec.anti_entropy_period + node, "ae", (node,))

        rounds = 0
        converged_at_round = -1
        max_time = workload_end + spec.anti_entropy_period * (spec.max_rounds + 2)
        while self.queue:
            at, _seq, kind, payload = heapq.heappop(self.queue)
            if at > max_time:
                break
            self.now = at
            if kind == "client":
                op, key, value = payload
                if op == "insert":
                    self.client_insert(key, value)
                elif op == "update":
                    self.client_update(key, value)
                else:
                    self.client_get(key)
            elif kind == "msg":
                src, dst, msg = payload
                self.messages_delivered += 1
                tag = msg[0]
                if tag == "store":
                    self.replica_on_receive(dst, msg[1])
                elif tag == "ae_digest":
                    self._on_ae_digest(dst, msg[1], msg[2])
                elif tag == "ae_request":
                    self._on_ae_request(dst, msg[1], msg[2])
            elif kind == "ae":
                (node,) = payload
                if node == 0:
                    rounds += 1
                    if not self._inflight() and not self.divergent_keys():
                        converged_at_round = rounds
                        break
                    if rounds >= spec.max_rounds:
                        break
                self._on_ae_tick(node)

        divergent = tuple(self.divergent_keys())
        return SimReport(
            converged=not divergent,
            rounds_to_converge=converged_at_round if converged_at_round >= 0 else rounds,
            messages=self.messages_delivered,
            rejected_count=self.rejected_count,
            divergence_keys=divergent,
            get_results=tuple(self.get_results),
        )

    def _inflight(self) -> bool:
        return any(kind == "msg" or kind == "client" for _, _, kind, _ in self.queue)


def run_scenario(spec: ScenarioSpec, registry: MutationRegistry | None = None) -> tuple[SimReport, SimWorld]:
    world = SimWorld(spec, registry)
    report = world.run()
    return report, world
