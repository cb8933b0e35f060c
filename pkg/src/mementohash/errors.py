"""Exception types shared by the engines, the snapshot codec, and the CLI."""


class EngineError(ValueError):
    """Base class for illegal cluster-state manipulations."""


class BucketOutOfRange(EngineError):
    """The bucket id lies outside the engine's id range."""


class BucketNotWorking(EngineError):
    """The bucket id is in range but the bucket is already removed."""


class LastWorkingBucket(EngineError):
    """Removing this bucket would leave the cluster with no working bucket."""


class CapacityExceeded(EngineError):
    """A fixed-capacity engine was asked to grow beyond its capacity."""


class RemovalOrderError(EngineError):
    """The engine only supports tail (LIFO) removals."""


class SnapshotError(ValueError):
    """A state snapshot is malformed or internally inconsistent."""


class LookupCorruption(RuntimeError):
    """A lookup exceeded its iteration cap; the state table is corrupt."""
