"""State digests and the seeded index-hash family.

Every object state is identified by a 32-byte blake2b digest of its bytes.
Filter updates map a digest to ``m`` counter indices in ``[0, n)`` using a
family of keyed blake2b hashes: function ``i`` of the family is blake2b
keyed with (seed, i).  Identical (digest, config) pairs always produce the
same index list, on any platform.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

DIGEST_SIZE = 32


@dataclass(frozen=True)
class HashConfig:
    """Index-space size n, family size m, and the 64-bit family seed."""

    n: int = 256
    m: int = 4
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must fit in 64 bits")


def state_digest(state: bytes) -> bytes:
    """32-byte digest of a state's canonical bytes."""
    return hashlib.blake2b(state, digest_size=DIGEST_SIZE).digest()


def hash_indices(digest: bytes, cfg: HashConfig) -> list[int]:
    """The m counter indices for a digest.  Duplicates are permitted."""
    out = []
    for i in range(cfg.m):
        key = struct.pack("<QI", cfg.seed, i)
        h = hashlib.blake2b(digest, digest_size=8, key=key).digest()
        out.append(struct.unpack("<Q", h)[0] % cfg.n)
    return out


def hash_u64(data: bytes) -> int:
    """Unkeyed 64-bit hash, used for ring positions and sampling."""
    return struct.unpack("<Q", hashlib.blake2b(data, digest_size=8).digest())[0]
