"""Baseline lookup engines sharing one surface with :class:`MementoHash`.

Engines:
    JumpEngine   -- bare jump hash; grows and shrinks only at the tail
    AnchorEngine -- fixed-capacity in-place engine keeping, per removed
                    bucket, the working-set size at removal time
    DxEngine     -- fixed-capacity engine probing a pseudo-random bucket
                    sequence until it hits a working bucket

Common surface: ``add() -> int``, ``remove(b)``, ``lookup(key) -> int``,
``lookup_traced(key) -> (int, LookupTrace)``, ``lookup_many(keys)``,
``lookup_many_traced(keys)``, plus ``working_count``, ``capacity``
(None when unbounded), ``memory_entries`` and ``memory_bytes_estimate``.
Lookups are pure functions of (state, key) and never return a non-working
bucket.  Trace accounting mirrors MementoHash: ``external_iterations``
counts redraw rounds after the initial placement, ``internal`` counts
pointer-chasing hops, so ``product_work`` is comparable across engines.

The anchor and dx hash schedules here (initial placement ``mix64(key) mod
capacity``, per-bucket rehash via ``keyed_hash``, dx probing by iterating
mix64 on the digest) are implementation choices, not normative: these two
engines are compared on properties and complexity trends, never on
bit-exact outputs.
"""

from __future__ import annotations

import numpy as np

from .errors import (
    BucketNotWorking,
    BucketOutOfRange,
    CapacityExceeded,
    LastWorkingBucket,
    LookupCorruption,
    RemovalOrderError,
)
from .hashing import jump, jump_many, keyed_hash, keyed_hash_many, mix64, mix64_many
from .memento import EMPTY_TRACE, LookupTrace


class JumpEngine:
    """Tail-only cluster: the whole state is the bucket count."""

    def __init__(self, initial_node_count: int) -> None:
        if initial_node_count < 1:
            raise ValueError("initial node count must be positive")
        self._n = int(initial_node_count)

    @property
    def working_count(self) -> int:
        return self._n

    @property
    def capacity(self) -> None:
        return None

    @property
    def memory_entries(self) -> int:
        return 1

    @property
    def memory_bytes_estimate(self) -> int:
        return 8

    def add(self) -> int:
        b = self._n
        self._n += 1
        return b

    def remove(self, b: int) -> None:
        """Remove bucket ``b``; only the tail bucket can go."""
        if not 0 <= b < self._n:
            raise BucketOutOfRange(f"bucket {b} not in [0, {self._n})")
        if b != self._n - 1:
            raise RemovalOrderError("jump engine only removes the tail bucket")
        if self._n == 1:
            raise LastWorkingBucket("cannot remove the last working bucket")
        self._n -= 1

    def remove_tail(self) -> int:
        b = self._n - 1
        self.remove(b)
        return b

    def lookup(self, key: int) -> int:
        return jump(key, self._n)

    def lookup_traced(self, key: int) -> tuple[int, LookupTrace]:
        return jump(key, self._n), EMPTY_TRACE

    def lookup_many(self, keys: np.ndarray) -> np.ndarray:
        return jump_many(keys, self._n)

    def lookup_many_traced(self, keys):
        out = jump_many(keys, self._n)
        zeros = np.zeros(out.shape[0], dtype=np.int64)
        return out, zeros, zeros.copy(), zeros.copy()


class AnchorEngine:
    """Fixed-capacity engine with in-place integer-array state.

    For every bucket ``b`` the array ``A`` holds 0 while ``b`` works and
    the working-set size at the moment of ``b``'s removal otherwise.  A
    lookup rehashes into that historical range and, when it lands on a
    bucket removed even earlier, chases successor pointers ``K`` until it
    reaches one removed later (or a working one).  ``W``/``L`` maintain the
    compacted working array so removal and restore are O(1).
    """

    def __init__(self, capacity: int, working: int) -> None:
        if working < 1:
            raise ValueError("working bucket count must be positive")
        if capacity < working:
            raise ValueError("capacity must be at least the working bucket count")
        a = int(capacity)
        self._a = a
        self._A = np.zeros(a, dtype=np.int64)
        self._K = np.arange(a, dtype=np.int64)
        self._W = list(range(a))
        self._L = list(range(a))
        self._N = int(working)
        self._stack: list[int] = []
        for b in range(a - 1, working - 1, -1):
            self._stack.append(b)
            self._A[b] = b

    @property
    def working_count(self) -> int:
        return self._N

    @property
    def capacity(self) -> int:
        return self._a

    @property
    def memory_entries(self) -> int:
        return self._a

    @property
    def memory_bytes_estimate(self) -> int:
        # four int64 arrays of size a plus the removed-bucket stack
        return 32 * self._a + 8 * len(self._stack)

    def is_working(self, b: int) -> bool:
        return 0 <= b < self._a and self._A[b] == 0

    def working_buckets(self) -> list[int]:
        return [b for b in range(self._a) if self._A[b] == 0]

    def add(self) -> int:
        if not self._stack:
            raise CapacityExceeded(f"all {self._a} buckets are already working")
        b = self._stack.pop()
        N = self._N
        self._A[b] = 0
        self._L[self._W[N]] = N
        self._W[self._L[b]] = b
        self._K[b] = b
        self._N += 1
        return b

    def remove(self, b: int) -> None:
        if not 0 <= b < self._a:
            raise BucketOutOfRange(f"bucket {b} not in [0, {self._a})")
        if self._A[b] != 0:
            raise BucketNotWorking(f"bucket {b} is not working")
        if self._N == 1:
            raise LastWorkingBucket("cannot remove the last working bucket")
        self._stack.append(b)
        self._N -= 1
        N = self._N
        self._A[b] = N
        self._W[self._L[b]] = self._W[N]
        self._L[self._W[N]] = self._L[b]
        self._K[b] = self._W[N]

    def lookup(self, key: int) -> int:
        A = self._A
        K = self._K
        cap = self._a + 1
        b = mix64(key) % self._a
        guard = 0
        while A[b] > 0:
            guard += 1
            if guard > cap:
                raise LookupCorruption("anchor outer loop exceeded capacity")
            ab = int(A[b])
            h = keyed_hash(key, b) % ab
            hops = 0
            while A[h] >= ab:
                h = int(K[h])
                hops += 1
                if hops > cap:
                    raise LookupCorruption("anchor pointer walk exceeded capacity")
            b = h
        return int(b)

    def lookup_traced(self, key: int) -> tuple[int, LookupTrace]:
        A = self._A
        K = self._K
        b = mix64(key) % self._a
        ext = 0
        hops_total = 0
        while A[b] > 0:
            ext += 1
            ab = int(A[b])
            h = keyed_hash(key, b) % ab
            while A[h] >= ab:
                h = int(K[h])
                hops_total += 1
            b = h
        return int(b), LookupTrace(ext, hops_total)

    def lookup_many(self, keys: np.ndarray) -> np.ndarray:
        buckets, _, _, _ = self.lookup_many_traced(keys)
        return buckets

    def lookup_many_traced(self, keys):
        keys = np.asarray(keys, dtype=np.uint64)
        A = self._A
        K = self._K
        out = (mix64_many(keys) % np.uint64(self._a)).astype(np.int64)
        size = out.shape[0]
        ext = np.zeros(size, dtype=np.int64)
        inner = np.zeros(size, dtype=np.int64)
        live = np.nonzero(A[out] > 0)[0]
        b = out[live]
        k = keys[live]
        while live.size:
            ext[live] += 1
            ab = A[b]
            h = (keyed_hash_many(k, b) % ab.astype(np.uint64)).astype(np.int64)
            while True:
                bad = np.nonzero(A[h] >= ab)[0]
                if not bad.size:
                    break
                h[bad] = K[h[bad]]
                inner[live[bad]] += 1
            b = h
            done = A[b] == 0
            out[live[done]] = b[done]
            keep = ~done
            live = live[keep]
            b = b[keep]
            k = k[keep]
        return out, ext, inner, ext + inner


class DxEngine:
    """Fixed-capacity engine probing a per-key pseudo-random sequence.

    The probe sequence iterates mix64 on the key digest; each state maps to
    a slot in [0, capacity) and the first working slot wins.  Expected
    probes per lookup equal capacity / working.
    """

    def __init__(self, capacity: int, working: int) -> None:
        if working < 1:
            raise ValueError("working bucket count must be positive")
        if capacity < working:
            raise ValueError("capacity must be at least the working bucket count")
        a = int(capacity)
        self._a = a
        self._alive = np.zeros(a, dtype=bool)
        self._alive[: int(working)] = True
        self._N = int(working)
        self._stack = list(range(a - 1, working - 1, -1))

    @property
    def working_count(self) -> int:
        return self._N

    @property
    def capacity(self) -> int:
        return self._a

    @property
    def memory_entries(self) -> int:
        return self._a

    @property
    def memory_bytes_estimate(self) -> int:
        # availability bit per bucket plus the removed-bucket stack
        return self._a // 8 + 1 + 8 * len(self._stack)

    def is_working(self, b: int) -> bool:
        return 0 <= b < self._a and bool(self._alive[b])

    def working_buckets(self) -> list[int]:
        return np.nonzero(self._alive)[0].tolist()

    def _probe_cap(self) -> int:
        # P(exceed) ~ exp(-64) even for a single working bucket
        return 64 * self._a // max(self._N, 1) + 64

    def add(self) -> int:
        if not self._stack:
            raise CapacityExceeded(f"all {self._a} buckets are already working")
        b = self._stack.pop()
        self._alive[b] = True
        self._N += 1
        return b

    def remove(self, b: int) -> None:
        if not 0 <= b < self._a:
            raise BucketOutOfRange(f"bucket {b} not in [0, {self._a})")
        if not self._alive[b]:
            raise BucketNotWorking(f"bucket {b} is not working")
        if self._N == 1:
            raise LastWorkingBucket("cannot remove the last working bucket")
        self._alive[b] = False
        self._N -= 1
        self._stack.append(b)

    def lookup(self, key: int) -> int:
        alive = self._alive
        a = self._a
        state = key
        for _ in range(self._probe_cap()):
            state = mix64(state)
            slot = state % a
            if alive[slot]:
                return slot
        raise LookupCorruption("dx probe sequence exceeded its cap")

    def lookup_traced(self, key: int) -> tuple[int, LookupTrace]:
        alive = self._alive
        a = self._a
        state = key
        misses = 0
        for _ in range(self._probe_cap()):
            state = mix64(state)
            slot = state % a
            if alive[slot]:
                return slot, LookupTrace(misses, 0)
            misses += 1
        raise LookupCorruption("dx probe sequence exceeded its cap")

    def lookup_many(self, keys: np.ndarray) -> np.ndarray:
        buckets, _, _, _ = self.lookup_many_traced(keys)
        return buckets

    def lookup_many_traced(self, keys):
        keys = np.asarray(keys, dtype=np.uint64)
        alive = self._alive
        a = np.uint64(self._a)
        size = keys.shape[0]
        out = np.zeros(size, dtype=np.int64)
        ext = np.zeros(size, dtype=np.int64)
        live = np.arange(size)
        state = keys.copy()
        rounds = 0
        cap = self._probe_cap()
        while live.size:
            rounds += 1
            if rounds > cap:
                raise LookupCorruption("dx probe sequence exceeded its cap")
            state = mix64_many(state)
            slot = (state % a).astype(np.int64)
            found = alive[slot]
            out[live[found]] = slot[found]
            ext[live[found]] = rounds - 1
            keep = ~found
            live = live[keep]
            state = state[keep]
        zeros = np.zeros(size, dtype=np.int64)
        return out, ext, zeros, ext.copy()
