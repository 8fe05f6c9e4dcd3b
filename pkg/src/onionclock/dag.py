"""Ground-truth derivation DAG: the causality oracle.

Records every create/mutate edge as it happens.  ``dag_reaches(a, b)`` is the
definite happens-before relation: true iff a directed mutation path leads
from a to b.  Reachability is answered from per-node ancestor bitsets built
incrementally, so querying is O(1) after O(V * E / wordsize) maintenance.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class DagNode:
    node_id: int
    digest: bytes
    depth: int
    creator: int
    parents: tuple[int, ...]


@dataclass
class DerivationDag:
    nodes: list[DagNode] = field(default_factory=list)
    # ancestors[i]: bitset (int) of every node with a path into i, excluding i.
    _ancestors: list[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.nodes)

    def add_create(self, digest: bytes, creator: int = 0) -> int:
        return self._add(digest, (), creator)

    def add_mutate(self, digest: bytes, parents: tuple[int, ...], creator: int = 0) -> int:
        if not parents:
            raise ValueError("mutate needs at least one parent")
        return self._add(digest, parents, creator)

    def _add(self, digest: bytes, parents: tuple[int, ...], creator: int) -> int:
        for p in parents:
            if not 0 <= p < len(self.nodes):
                raise KeyError(f"unknown parent id {p}")
        node_id = len(self.nodes)
        depth = 1 if not parents else 1 + max(self.nodes[p].depth for p in parents)
        self.nodes.append(DagNode(node_id, digest, depth, creator, parents))
        anc = 0
        for p in parents:
            anc |= self._ancestors[p] | (1 << p)
        self._ancestors.append(anc)
        return node_id

    def dag_reaches(self, a: int, b: int) -> bool:
        """True iff a path of mutations leads from a to b (a precedes b).
        Reflexively false."""
        if not 0 <= a < len(self.nodes) or not 0 <= b < len(self.nodes):
            raise KeyError("unknown object id")
        if a == b:
            return False
        return bool((self._ancestors[b] >> a) & 1)

    def concurrent(self, a: int, b: int) -> bool:
        return a != b and not self.dag_reaches(a, b) and not self.dag_reaches(b, a)

    def depth_of(self, node_id: int) -> int:
        return self.nodes[node_id].depth
