"""Replacement-chain consistent hashing engine.

The engine state is three values: the b-array size ``n``, a table of
replacement records, and the last removed bucket ``l``.  A record
``b -> (c, p)`` says that removed bucket ``b`` was replaced by bucket
``c`` and that ``p`` was the bucket removed just before ``b`` (``p = n``
for the first removal).  ``c`` always equals the working-bucket count
right after ``b``'s removal, so the lookup can reuse it as the rehash
range without storing anything else.  The ``p`` links form a LIFO stack:
growing the cluster restores removed buckets in reverse removal order,
which is what keeps disruption minimal and growth monotonic.

While the table is empty the engine degenerates to the bare jump hash:
lookups cost a single jump evaluation and no memory beyond the counter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    BucketNotWorking,
    BucketOutOfRange,
    LastWorkingBucket,
    LookupCorruption,
    SnapshotError,
)
from .hashing import jump, jump_many, keyed_hash

SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class LookupTrace:
    """Iteration counters for one lookup.

    ``external_iterations`` counts outer-loop passes (zero exactly when the
    initial jump lands on a working bucket).  ``internal_iterations_total``
    counts replacement-chain hops summed over all passes.
    """

    external_iterations: int
    internal_iterations_total: int

    @property
    def product_work(self) -> int:
        """Total nested-loop work: each pass costs its chain hops plus one."""
        return self.external_iterations + self.internal_iterations_total


EMPTY_TRACE = LookupTrace(0, 0)


class MementoHash:
    """Consistent hashing over ``n`` buckets with random-removal support."""

    def __init__(self, initial_node_count: int) -> None:
        if initial_node_count < 1:
            raise ValueError("initial node count must be positive")
        self._n = int(initial_node_count)
        self._replacements: dict[int, tuple[int, int]] = {}
        self._last_removed = self._n

    # -- state accessors ---------------------------------------------------

    @property
    def size(self) -> int:
        """Size of the b-array (largest bucket id ever live is size-1)."""
        return self._n

    @property
    def working_count(self) -> int:
        return self._n - len(self._replacements)

    @property
    def replacement_count(self) -> int:
        return len(self._replacements)

    @property
    def last_removed(self) -> int:
        """Last removed bucket; equals ``size`` when nothing is removed."""
        return self._last_removed

    @property
    def capacity(self) -> None:
        """Unbounded: the cluster can grow indefinitely."""
        return None

    @property
    def memory_entries(self) -> int:
        return len(self._replacements)

    @property
    def memory_bytes_estimate(self) -> int:
        # three ints per record plus the size/last-removed header
        return 24 * len(self._replacements) + 16

    def replacements(self) -> dict[int, tuple[int, int]]:
        """Copy of the replacement table ``b -> (c, p)``."""
        return dict(self._replacements)

    def is_working(self, b: int) -> bool:
        return 0 <= b < self._n and b not in self._replacements

    def working_buckets(self) -> list[int]:
        removed = self._replacements
        return [b for b in range(self._n) if b not in removed]

    def clone(self) -> "MementoHash":
        other = MementoHash.__new__(MementoHash)
        other._n = self._n
        other._replacements = dict(self._replacements)
        other._last_removed = self._last_removed
        return other

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MementoHash):
            return NotImplemented
        return (
            self._n == other._n
            and self._last_removed == other._last_removed
            and self._replacements == other._replacements
        )

    def __repr__(self) -> str:
        return (
            f"MementoHash(size={self._n}, working={self.working_count}, "
            f"removed={self.replacement_count}, last_removed={self._last_removed})"
        )

    # -- mutation ----------------------------------------------------------

    def remove(self, b: int) -> None:
        """Remove working bucket ``b``.

        Removing the tail bucket of an intact cluster shrinks the b-array;
        any other removal files a replacement record.  Rejected without
        state change when ``b`` is out of range, already removed, or the
        final working bucket.
        """
        if not 0 <= b < self._n:
            raise BucketOutOfRange(f"bucket {b} not in [0, {self._n})")
        if b in self._replacements:
            raise BucketNotWorking(f"bucket {b} is not working")
        if self.working_count == 1:
            raise LastWorkingBucket("cannot remove the last working bucket")
        if b == self._n - 1 and not self._replacements:
            self._n -= 1
        else:
            w = self._n - len(self._replacements)
            self._replacements[b] = (w - 1, self._last_removed)
        self._last_removed = b

    def add(self) -> int:
        """Add a bucket and return its id.

        Restores the last removed bucket if any record exists, otherwise
        grows the b-array at the tail.
        """
        if not self._replacements:
            b = self._n
            self._n += 1
            self._last_removed = self._n
            return b
        b = self._last_removed
        _, p = self._replacements.pop(b)
        self._last_removed = p
        return b

    # -- lookup ------------------------------------------------------------

    def lookup(self, key: int) -> int:
        """Map a 64-bit key digest to a working bucket."""
        b = jump(key, self._n)
        if not self._replacements:
            return b
        return self._resolve(key, b)

    def _resolve(self, key: int, b: int) -> int:
        """Follow replacement records from a jump result to a working bucket."""
        repl = self._replacements
        cap = self._n + 1
        ext = 0
        entry = repl.get(b)
        while entry is not None:
            ext += 1
            if ext > cap:
                raise LookupCorruption("external loop exceeded table size")
            wb = entry[0]
            d = keyed_hash(key, b) % wb
            hops = 0
            sub = repl.get(d)
            while sub is not None and sub[0] >= wb:
                d = sub[0]
                sub = repl.get(d)
                hops += 1
                if hops > cap:
                    raise LookupCorruption("chain walk exceeded table size")
            b = d
            entry = sub
        return b

    def lookup_traced(self, key: int) -> tuple[int, LookupTrace]:
        """Lookup with iteration counters; same result as :meth:`lookup`."""
        b = jump(key, self._n)
        if not self._replacements:
            return b, EMPTY_TRACE
        return self._resolve_traced(key, b)

    def _resolve_traced(self, key: int, b: int) -> tuple[int, LookupTrace]:
        repl = self._replacements
        cap = self._n + 1
        ext = 0
        hops_total = 0
        entry = repl.get(b)
        while entry is not None:
            ext += 1
            if ext > cap:
                raise LookupCorruption("external loop exceeded table size")
            wb = entry[0]
            d = keyed_hash(key, b) % wb
            hops = 0
            sub = repl.get(d)
            while sub is not None and sub[0] >= wb:
                d = sub[0]
                sub = repl.get(d)
                hops += 1
                if hops > cap:
                    raise LookupCorruption("chain walk exceeded table size")
            hops_total += hops
            b = d
            entry = sub
        return b, LookupTrace(ext, hops_total)

    def lookup_path(self, key: int) -> tuple[int, LookupTrace, list[dict]]:
        """Lookup recording every step, for diagnostics and tracing.

        Returns ``(bucket, trace, steps)``.  The first step is
        ``{"jump": b}``; each outer pass adds ``{"bucket": b, "range": wb,
        "rehash": d, "chain": [d0, ..., dk]}`` where the chain lists the
        buckets visited while following replacement records.
        """
        b = jump(key, self._n)
        steps: list[dict] = [{"jump": b}]
        repl = self._replacements
        ext = 0
        hops_total = 0
        entry = repl.get(b)
        while entry is not None:
            ext += 1
            wb = entry[0]
            d = keyed_hash(key, b) % wb
            chain = [d]
            sub = repl.get(d)
            while sub is not None and sub[0] >= wb:
                d = sub[0]
                chain.append(d)
                sub = repl.get(d)
                hops_total += 1
            steps.append({"bucket": b, "range": wb, "rehash": chain[0], "chain": chain})
            b = d
            entry = sub
        return b, LookupTrace(ext, hops_total), steps

    def lookup_many(self, keys: np.ndarray) -> np.ndarray:
        """Vectorized lookup over a uint64 digest array."""
        keys = np.asarray(keys, dtype=np.uint64)
        out = jump_many(keys, self._n)
        if not self._replacements:
            return out
        removed = np.fromiter(self._replacements, count=len(self._replacements), dtype=np.int64)
        hit = np.nonzero(np.isin(out, removed))[0]
        for i in hit:
            out[i] = self._resolve(int(keys[i]), int(out[i]))
        return out

    def lookup_many_traced(
        self, keys: np.ndarray
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Vectorized traced lookup.

        Returns ``(buckets, external, internal, work)`` int64 arrays, one
        entry per key, matching :meth:`lookup_traced` element-wise.
        """
        keys = np.asarray(keys, dtype=np.uint64)
        out = jump_many(keys, self._n)
        ext = np.zeros(out.shape[0], dtype=np.int64)
        inner = np.zeros(out.shape[0], dtype=np.int64)
        if self._replacements:
            removed = np.fromiter(
                self._replacements, count=len(self._replacements), dtype=np.int64
            )
            hit = np.nonzero(np.isin(out, removed))[0]
            for i in hit:
                b, trace = self._resolve_traced(int(keys[i]), int(out[i]))
                out[i] = b
                ext[i] = trace.external_iterations
                inner[i] = trace.internal_iterations_total
        return out, ext, inner, ext + inner

    # -- snapshots -----------------------------------------------------------

    def save_state(self) -> bytes:
        """Serialize the state as versioned JSON (UTF-8 bytes).

        Record order in the output is sorted by removed bucket; the loader
        accepts any order.
        """
        doc = {
            "version": SNAPSHOT_VERSION,
            "n": self._n,
            "l": self._last_removed,
            "replacements": [[b, c, p] for b, (c, p) in sorted(self._replacements.items())],
        }
        return json.dumps(doc, separators=(",", ":")).encode("utf-8")

    @classmethod
    def load_state(cls, data: bytes | str) -> "MementoHash":
        """Rebuild an engine from :meth:`save_state` output.

        Rejects malformed JSON, unknown versions, duplicate records, records
        whose replacing bucket contradicts the removal order implied by the
        ``p`` chain, and ``p`` chains that do not visit every record exactly
        once before terminating at ``n``.
        """
        if isinstance(data, bytes):
            try:
                data = data.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise SnapshotError(f"snapshot is not UTF-8: {exc}") from None
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise SnapshotError(f"snapshot is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise SnapshotError("snapshot must be a JSON object")
        if doc.get("version") != SNAPSHOT_VERSION:
            raise SnapshotError(f"unsupported snapshot version: {doc.get('version')!r}")
        n = doc.get("n")
        last = doc.get("l")
        raw = doc.get("replacements")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise SnapshotError("field 'n' must be a positive integer")
        if not isinstance(last, int) or isinstance(last, bool):
            raise SnapshotError("field 'l' must be an integer")
        if not isinstance(raw, list):
            raise SnapshotError("field 'replacements' must be a list")
        table: dict[int, tuple[int, int]] = {}
        for item in raw:
            if (
                not isinstance(item, list)
                or len(item) != 3
                or not all(isinstance(v, int) and not isinstance(v, bool) for v in item)
            ):
                raise SnapshotError(f"bad replacement record: {item!r}")
            b, c, p = item
            if not 0 <= b < n:
                raise SnapshotError(f"removed bucket {b} out of range [0, {n})")
            if b in table:
                raise SnapshotError(f"duplicate record for bucket {b}")
            table[b] = (c, p)
        r = len(table)
        if r >= n:
            raise SnapshotError("no working bucket left")
        if r == 0:
            if last != n:
                raise SnapshotError(f"empty table requires l == n, got l={last}")
        else:
            cls._validate_chain(n, last, table)
        engine = cls.__new__(cls)
        engine._n = n
        engine._replacements = table
        engine._last_removed = last
        return engine

    @staticmethod
    def _validate_chain(n: int, last: int, table: dict[int, tuple[int, int]]) -> None:
        """Walk the p chain from ``last`` and check every implied invariant.

        Position i of the walk holds the (r-i)-th removed bucket, so its
        replacing bucket must be n-r+i; the final p must be n, the b-array
        size when the first record was filed.
        """
        r = len(table)
        cur = last
        seen = set()
        for i in range(r):
            if cur not in table:
                raise SnapshotError(f"p chain reaches {cur}, which has no record")
            if cur in seen:
                raise SnapshotError(f"p chain revisits bucket {cur}")
            seen.add(cur)
            c, p = table[cur]
            expected_c = n - r + i
            if c != expected_c:
                raise SnapshotError(
                    f"record for bucket {cur} has replacement {c}, expected {expected_c}"
                )
            cur = p
        if cur != n:
            raise SnapshotError(f"p chain terminates at {cur}, expected {n}")
