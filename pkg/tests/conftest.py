"""Shared test helpers: independent transcriptions used as cross-check oracles.

These mirrors are deliberately written from the published formulas rather
than imported from the package, so they can arbitrate the library's
implementations.
"""

import numpy as np
import pytest

U64 = 0xFFFFFFFFFFFFFFFF


def reference_jump(key, num_buckets):
    """Straight transcription of the published jump-hash pseudocode."""
    b = -1
    j = 0
    key &= U64
    while j < num_buckets:
        b = j
        key = (key * 2862933555777941757 + 1) & U64
        j = int(float(b + 1) * (float(1 << 31) / float((key >> 33) + 1)))
    return b


def reference_mix64_np(values):
    """Vectorized transcription of the splitmix64 finalizer."""
    z = np.asarray(values, dtype=np.uint64)
    z = z ^ (z >> np.uint64(30))
    z = z * np.uint64(0xBF58476D1CE4E5B9)
    z = z ^ (z >> np.uint64(27))
    z = z * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def reference_fnv1a_np(byte_matrix):
    """Vectorized FNV-1a over fixed-width byte rows (one row per key)."""
    rows = np.asarray(byte_matrix, dtype=np.uint64)
    h = np.full(rows.shape[0], 0xCBF29CE484222325, dtype=np.uint64)
    for col in range(rows.shape[1]):
        h = (h ^ rows[:, col]) * np.uint64(0x100000001B3)
    return h


@pytest.fixture
def uniform_keys():
    """Seeded uniform 64-bit digests, sized on demand."""

    def make(count, seed=0):
        return np.random.default_rng(seed).integers(0, 1 << 64, size=count, dtype=np.uint64)

    return make
