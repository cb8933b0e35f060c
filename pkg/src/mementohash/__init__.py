"""Consistent hashing with replacement chains.

The core engine maps 64-bit key digests onto a growing/shrinking set of
integer buckets while guaranteeing balance, minimal disruption on removal,
and monotonic growth, using memory proportional only to the number of
removed buckets.  Baseline engines (jump, anchor, dx) share the same
surface for comparison, a linear-scan reference model arbitrates
correctness, and a benchmark harness reproduces the standard evaluation
scenarios at desk scale.
"""

from .engines import AnchorEngine, DxEngine, JumpEngine
from .errors import (
    BucketNotWorking,
    BucketOutOfRange,
    CapacityExceeded,
    EngineError,
    LastWorkingBucket,
    LookupCorruption,
    RemovalOrderError,
    SnapshotError,
)
from .hashing import digest_key, jump, jump_many, keyed_hash, mix64
from .memento import LookupTrace, MementoHash
from .oracle import (
    PropertyReport,
    ReferenceModel,
    check_balance,
    check_equivalence,
    check_iteration_bounds,
    check_minimal_disruption,
    check_monotonicity,
    naive_lookup,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorEngine",
    "BucketNotWorking",
    "BucketOutOfRange",
    "CapacityExceeded",
    "DxEngine",
    "EngineError",
    "JumpEngine",
    "LastWorkingBucket",
    "LookupCorruption",
    "LookupTrace",
    "MementoHash",
    "PropertyReport",
    "ReferenceModel",
    "RemovalOrderError",
    "SnapshotError",
    "check_balance",
    "check_equivalence",
    "check_iteration_bounds",
    "check_minimal_disruption",
    "check_monotonicity",
    "digest_key",
    "jump",
    "jump_many",
    "keyed_hash",
    "mix64",
    "naive_lookup",
]
