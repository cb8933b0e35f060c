"""Deterministic 64-bit hashing primitives shared by every engine.

Primitives:
    fnv1a_64    -- FNV-1a hash of a byte string
    mix64       -- splitmix64 finalizer (bijective bit mixer)
    digest_key  -- FNV-1a folded through mix64; turns arbitrary key bytes
                   into the 64-bit digest every lookup consumes
    keyed_hash  -- per-bucket rehash of a digest
    jump        -- jump consistent hash (Lamping-Veach loop)
    *_many      -- vectorized variants over numpy uint64 arrays

All functions are pure and mask to 64 bits explicitly, so results are
identical across platforms and bit-identical between the scalar and the
vectorized paths.
"""

from __future__ import annotations

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3

# Linear-congruential multiplier of the published jump-hash loop.
JUMP_MULT = 2862933555777941757

_MIX_A = 0xBF58476D1CE4E5B9
_MIX_B = 0x94D049BB133111EB


def fnv1a_64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string (empty input allowed)."""
    h = FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * FNV_PRIME) & MASK64
    return h


def mix64(z: int) -> int:
    """splitmix64 finalizer: three xor-shift/multiply rounds mod 2^64.

    Bijective on 64-bit values with strong avalanche behaviour; used to
    decorrelate digests and bucket ids before any modular reduction.
    """
    z &= MASK64
    z ^= z >> 30
    z = (z * _MIX_A) & MASK64
    z ^= z >> 27
    z = (z * _MIX_B) & MASK64
    return z ^ (z >> 31)


def digest_key(data: bytes) -> int:
    """Digest arbitrary key bytes into a uniform 64-bit value."""
    return mix64(fnv1a_64(data))


def keyed_hash(key: int, b: int) -> int:
    """Rehash a key digest for bucket ``b``.

    The bucket id goes through mix64 before the xor so successive rehashes
    of one key against nearby bucket ids stay decorrelated.
    """
    return mix64((key ^ mix64(b)) & MASK64)


def jump(key: int, n: int) -> int:
    """Jump consistent hash: map a 64-bit digest to a bucket in [0, n).

    Consistency contract: if jump(k, m) = v and v < n <= m then
    jump(k, n) = v, so shrinking the bucket count only moves keys that sat
    on the removed tail.
    """
    if n < 1:
        raise ValueError("bucket count must be at least 1")
    key &= MASK64
    b, j = -1, 0
    while j < n:
        b = j
        key = (key * JUMP_MULT + 1) & MASK64
        j = int(float(b + 1) * (float(1 << 31) / float((key >> 33) + 1)))
    return b


def mix64_many(z: np.ndarray) -> np.ndarray:
    """Vectorized mix64 over a uint64 array."""
    z = np.asarray(z, dtype=np.uint64)
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(_MIX_A)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(_MIX_B)
    return z ^ (z >> np.uint64(31))


def keyed_hash_many(keys: np.ndarray, buckets: np.ndarray) -> np.ndarray:
    """Vectorized keyed_hash with a per-element bucket array."""
    keys = np.asarray(keys, dtype=np.uint64)
    b = np.asarray(buckets).astype(np.uint64)
    return mix64_many(keys ^ mix64_many(b))


def jump_many(keys: np.ndarray, n: int) -> np.ndarray:
    """Vectorized jump(); bit-identical to the scalar loop.

    ``keys`` is converted to uint64; returns an int64 array of buckets.
    """
    if n < 1:
        raise ValueError("bucket count must be at least 1")
    state = np.array(keys, dtype=np.uint64, copy=True).reshape(-1)
    out = np.zeros(state.shape[0], dtype=np.int64)
    live = np.arange(state.shape[0])
    j = np.zeros(state.shape[0], dtype=np.int64)
    mult = np.uint64(JUMP_MULT)
    one = np.uint64(1)
    s33 = np.uint64(33)
    two31 = np.float64(1 << 31)
    with np.errstate(over="ignore"):
        while live.size:
            b = j
            state = state * mult + one
            denom = ((state >> s33) + one).astype(np.float64)
            j = ((b + 1).astype(np.float64) * (two31 / denom)).astype(np.int64)
            done = j >= n
            out[live[done]] = b[done]
            keep = ~done
            live = live[keep]
            state = state[keep]
            j = j[keep]
    return out
