"""Verifiable mutation histories: the transcript re-execution backend.

A proof is the object's full derivation transcript: every distinct mutation
step (function id, params, parent references, expected child digest and depth
set) in deterministic topological order, plus the genesis states it bottoms
out in.  Each step carries a commitment hashed over its content and its
parents' commitments, so the transcript is a content-addressed DAG and any
reordering, insertion, or field tamper breaks the chain.

Verification replays every step from the genesis states - recomputing child
states, digests, clocks (including merge strategy), and depth sets - and
accepts only if the replayed terminal object matches the presented object
bit for bit and the commitment chain checks.

Completeness and soundness hold by deterministic recomputation.  Proof size
and verification time grow linearly with history length; the backend
contract is factored so a succinct recursive backend with constant-size
proofs could be swapped in without touching callers.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass
from typing import Protocol

from .dobc import DobcConfig, dobc_merge, dobc_new, dobc_tick, serialize_clock
from .hashing import DIGEST_SIZE, state_digest
from .objects import MutationRegistry, Obj

PROOF_WIRE_VERSION = 1

GENESIS_REF = 0
STEP_REF = 1


@dataclass(frozen=True)
class Step:
    fn_id: int
    params: bytes
    # (kind, payload): kind GENESIS_REF carries a genesis digest, STEP_REF a
    # step commitment.
    parent_refs: tuple[tuple[int, bytes], ...]
    parent_depths: tuple[tuple[int, ...], ...]
    child_digest: bytes
    child_depths: tuple[int, ...]
    commitment: bytes


def _encode_depths(depths: tuple[int, ...]) -> bytes:
    return struct.pack("<H", len(depths)) + b"".join(struct.pack("<Q", d) for d in depths)


def _step_commitment(
    fn_id: int,
    params: bytes,
    parent_refs: tuple[tuple[int, bytes], ...],
    parent_depths: tuple[tuple[int, ...], ...],
    child_digest: bytes,
    child_depths: tuple[int, ...],
) -> bytes:
    h = hashlib.blake2b(digest_size=DIGEST_SIZE)
    h.update(struct.pack("<IH", fn_id, len(params)))
    h.update(params)
    h.update(struct.pack("<B", len(parent_refs)))
    for (kind, payload), depths in zip(parent_refs, parent_depths):
        h.update(struct.pack("<B", kind))
        h.update(payload)
        h.update(_encode_depths(depths))
    h.update(child_digest)
    h.update(_encode_depths(child_depths))
    return h.digest()


def genesis_commitment(digest: bytes) -> bytes:
    return hashlib.blake2b(digest, digest_size=DIGEST_SIZE).digest()


@dataclass(frozen=True)
class TranscriptProof:
    steps: tuple[Step, ...]
    genesis_states: tuple[tuple[bytes, bytes], ...]  # (digest, state), sorted
    commitment: bytes

    @property
    def step_count(self) -> int:
        return len(self.steps)

    def size_bytes(self) -> int:
        return len(serialize_proof(self))


class ProofBackend(Protocol):
    """Contract every proof backend satisfies: honest proofs always verify;
    any single-step tamper of proof or object is rejected."""

    def prove_genesis(self, obj: Obj) -> TranscriptProof: ...

    def prove_step(
        self,
        prev_proofs: tuple[TranscriptProof, ...],
        fn_id: int,
        params: bytes,
        parents: tuple[Obj, ...],
        child: Obj,
    ) -> TranscriptProof: ...

    def verify(self, obj: Obj, proof: TranscriptProof, registry: MutationRegistry) -> bool: ...


def prove_genesis(obj: Obj) -> TranscriptProof:
    """Proof of a created object: no steps, commitment over the genesis digest."""
    return TranscriptProof((), ((obj.digest, obj.state),), genesis_commitment(obj.digest))


def _tiebreak_order(steps: set[Step]) -> tuple[Step, ...]:
    """Deterministic topological order: dependencies first, commitment bytes
    break ties."""
    by_commit = {s.commitment: s for s in steps}
    ordered: list[Step] = []
    done: set[bytes] = set()
    pending = sorted(by_commit, reverse=True)
    stack: list[tuple[bytes, bool]] = [(c, False) for c in pending]
    while stack:
        commit, expanded = stack.pop()
        if commit in done:
            continue
        step = by_commit[commit]
        if expanded:
            done.add(commit)
            ordered.append(step)
            continue
        stack.append((commit, True))
        deps = [p for kind, p in step.parent_refs if kind == STEP_REF and p in by_commit]
        for dep in sorted(deps, reverse=True):
            if dep not in done:
                stack.append((dep, False))
    return tuple(ordered)


def prove_step(
    prev_proofs: tuple[TranscriptProof, ...],
    fn_id: int,
    params: bytes,
    parents: tuple[Obj, ...],
    child: Obj,
) -> TranscriptProof:
    """Extend the parent transcripts with the step that produced `child`.

    Parent transcripts are merged deterministically (steps deduplicated by
    commitment, genesis states unioned) so diamond histories stay linear in
    the number of distinct steps.
    """
    if len(prev_proofs) != len(parents):
        raise ValueError("one prior proof per parent required")
    parent_refs = []
    parent_depths = []
    for proof, parent in zip(prev_proofs, parents):
        if proof.steps:
            parent_refs.append((STEP_REF, proof.commitment))
        else:
            parent_refs.append((GENESIS_REF, parent.digest))
        parent_depths.append(parent.depths)
    commitment = _step_commitment(
        fn_id, params, tuple(parent_refs), tuple(parent_depths), child.digest, child.depths
    )
    step = Step(
        fn_id,
        params,
        tuple(parent_refs),
        tuple(parent_depths),
        child.digest,
        child.depths,
        commitment,
    )
    all_steps = set(step for p in prev_proofs for step in p.steps)
    all_steps.add(step)
    genesis: dict[bytes, bytes] = {}
    for p in prev_proofs:
        genesis.update(dict(p.genesis_states))
    return TranscriptProof(
        _tiebreak_order(all_steps),
        tuple(sorted(genesis.items())),
        commitment,
    )


def verify(
    obj: Obj,
    proof: TranscriptProof,
    registry: MutationRegistry,
    config: DobcConfig | None = None,
) -> bool:
    """Replay the transcript from genesis and compare against `obj` bit for bit."""
    cfg = config or obj.clock.config
    try:
        # Transcripts are canonical: any reordering or duplication rejects.
        if proof.steps != _tiebreak_order(set(proof.steps)):
            return False
        # Recompute genesis objects.
        computed: dict[tuple[int, bytes], Obj] = {}
        for digest, state in proof.genesis_states:
            if state_digest(state) != digest:
                return False
            clock = dobc_tick(dobc_new(cfg), digest)
            computed[(GENESIS_REF, digest)] = Obj(state, digest, clock)

        last: Obj | None = None
        for step in proof.steps:
            expected = _step_commitment(
                step.fn_id,
                step.params,
                step.parent_refs,
                step.parent_depths,
                step.child_digest,
                step.child_depths,
            )
            if expected != step.commitment:
                return False
            mut = registry.get(step.fn_id)
            if len(step.parent_refs) != mut.arity:
                return False
            parents = []
            for ref, depths in zip(step.parent_refs, step.parent_depths):
                parent = computed.get(ref)
                if parent is None or parent.depths != depths:
                    return False
                parents.append(parent)
            state = mut.fn(step.params, tuple(p.state for p in parents))
            digest = state_digest(state)
            if digest != step.child_digest:
                return False
            if mut.arity == 2:
                base = dobc_merge(parents[0].clock, parents[1].clock)
            else:
                base = parents[0].clock
            clock = dobc_tick(base, digest)
            if clock.depths != step.child_depths:
                return False
            last = Obj(state, digest, clock)
            computed[(STEP_REF, step.commitment)] = last

        if proof.steps:
            if last is None or proof.commitment != proof.steps[-1].commitment:
                return False
            final = last
        else:
            final = computed.get((GENESIS_REF, obj.digest))
            if final is None or proof.commitment != genesis_commitment(obj.digest):
                return False
        return (
            final.state == obj.state
            and final.digest == obj.digest
            and serialize_clock(final.clock) == serialize_clock(obj.clock)
        )
    except (KeyError, ValueError, IndexError, struct.error):
        return False


class TranscriptBackend:
    """The reference ProofBackend: transcripts plus re-execution."""

    def prove_genesis(self, obj: Obj) -> TranscriptProof:
        return prove_genesis(obj)

    def prove_step(self, prev_proofs, fn_id, params, parents, child) -> TranscriptProof:
        return prove_step(prev_proofs, fn_id, params, parents, child)

    def verify(self, obj, proof, registry, config=None) -> bool:
        return verify(obj, proof, registry, config)


# ---------------------------------------------------------------------------
# Wire format


def serialize_proof(proof: TranscriptProof) -> bytes:
    out = bytearray()
    out += struct.pack("<H", PROOF_WIRE_VERSION)
    out += struct.pack("<I", len(proof.genesis_states))
    for digest, state in proof.genesis_states:
        out += digest
        out += struct.pack("<I", len(state))
        out += state
    out += struct.pack("<I", len(proof.steps))
    for step in proof.steps:
        out += struct.pack("<IH", step.fn_id, len(step.params))
        out += step.params
        out += struct.pack("<B", len(step.parent_refs))
        for (kind, payload), depths in zip(step.parent_refs, step.parent_depths):
            out += struct.pack("<B", kind)
            out += payload
            out += _encode_depths(depths)
        out += step.child_digest
        out += _encode_depths(step.child_depths)
        out += step.commitment
    out += proof.commitment
    return struct.pack("<I", len(out)) + bytes(out)


def deserialize_proof(data: bytes) -> TranscriptProof:
    (total,) = struct.unpack_from("<I", data, 0)
    if total != len(data) - 4:
        raise ValueError("length prefix mismatch")
    off = 4
    (version,) = struct.unpack_from("<H", data, off)
    off += 2
    if version != PROOF_WIRE_VERSION:
        raise ValueError(f"unsupported proof wire version {version}")
    (gcount,) = struct.unpack_from("<I", data, off)
    off += 4
    genesis = []
    for _ in range(gcount):
        digest = data[off : off + DIGEST_SIZE]
        off += DIGEST_SIZE
        (slen,) = struct.unpack_from("<I", data, off)
        off += 4
        genesis.append((digest, data[off : off + slen]))
        off += slen
    (scount,) = struct.unpack_from("<I", data, off)
    off += 4
    steps = []
    for _ in range(scount):
        fn_id, plen = struct.unpack_from("<IH", data, off)
        off += 6
        params = data[off : off + plen]
        off += plen
        (nparents,) = struct.unpack_from("<B", data, off)
        off += 1
        refs = []
        pdepths = []
        for _ in range(nparents):
            (kind,) = struct.unpack_from("<B", data, off)
            off += 1
            payload = data[off : off + DIGEST_SIZE]
            off += DIGEST_SIZE
            (dcount,) = struct.unpack_from("<H", data, off)
            off += 2
            ds = struct.unpack_from("<%dQ" % dcount, data, off)
            off += 8 * dcount
            refs.append((kind, payload))
            pdepths.append(tuple(ds))
        child_digest = data[off : off + DIGEST_SIZE]
        off += DIGEST_SIZE
        (dcount,) = struct.unpack_from("<H", data, off)
        off += 2
        child_depths = struct.unpack_from("<%dQ" % dcount, data, off)
        off += 8 * dcount
        commitment = data[off : off + DIGEST_SIZE]
        off += DIGEST_SIZE
        steps.append(
            Step(fn_id, params, tuple(refs), tuple(pdepths), child_digest,
                 tuple(child_depths), commitment)
        )
    commitment = data[off : off + DIGEST_SIZE]
    off += DIGEST_SIZE
    if off != len(data):
        raise ValueError("trailing bytes in proof serialization")
    return TranscriptProof(tuple(steps), tuple(genesis), commitment)
