"""Consistent-hash ring with virtual nodes.

Each physical node owns `vnodes` positions on a 64-bit ring.  A key is
served by the R distinct physical nodes owning the closest positions
clockwise from the key's hash, so membership changes only move the keys
adjacent to the changed node.
"""

from __future__ import annotations

import bisect

from .hashing import hash_u64


class Ring:
    def __init__(self, nodes: list[int], vnodes: int = 64):
        if not nodes:
            raise ValueError("ring needs at least one node")
        if vnodes < 1:
            raise ValueError("vnodes must be >= 1")
        self.vnodes = vnodes
        self.nodes = sorted(set(nodes))
        entries: list[tuple[int, int]] = []
        for node in self.nodes:
            for v in range(vnodes):
                entries.append((hash_u64(b"vnode:%d:%d" % (node, v)), node))
        entries.sort()
        self._positions = [p for p, _ in entries]
        self._owners = [n for _, n in entries]

    def replica_group(self, key: bytes, r: int) -> list[int]:
        """The r distinct physical nodes clockwise from hash(key)."""
        if r > len(self.nodes):
            raise ValueError("replication factor exceeds node count")
        start = bisect.bisect_left(self._positions, hash_u64(key))
        group: list[int] = []
        seen: set[int] = set()
        size = len(self._owners)
        for i in range(size):
            owner = self._owners[(start + i) % size]
            if owner not in seen:
                seen.add(owner)
                group.append(owner)
                if len(group) == r:
                    break
        return group

    def without(self, node: int) -> "Ring":
        return Ring([n for n in self.nodes if n != node], self.vnodes)
