"""Deterministic random substreams.

Every random draw in the package comes from a :class:`numpy.random.Generator`
backed by PCG64 whose seed is derived by hashing ``(master_seed, label,
index)`` with BLAKE2b.  Two calls with the same triple yield bit-identical
streams, independently of process, worker count or scheduling order.
"""

import hashlib
import struct

import numpy as np

MASK64 = (1 << 64) - 1


def derive_seed(master_seed, label="", index=0):
    """Return a 64-bit seed for substream ``(master_seed, label, index)``."""
    h = hashlib.blake2b(digest_size=8, person=b"gaussqc-rng")
    h.update(struct.pack("<Q", int(master_seed) & MASK64))
    h.update(str(label).encode())
    h.update(b"\x00")
    h.update(struct.pack("<q", int(index)))
    return int.from_bytes(h.digest(), "little")


def generator(master_seed, label="", index=0):
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, label, index)))
