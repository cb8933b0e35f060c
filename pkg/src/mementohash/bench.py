"""Benchmark scenarios over the lookup engines, with CSV output.

Scenarios mirror the evaluation grids the engines are designed around:

* ``stable``       -- no removals, one measurement at the initial size
* ``oneshot``      -- remove a fraction of the initial buckets at once
* ``incremental``  -- cumulative removal sweep over fractions 5%..90%
* ``sensitivity``  -- capacity-ratio sweep {5, 10, 20, 50, 100} for the
                      fixed-capacity engines

Metrics split into hardware-independent counters (iteration means, memory
entries) that are bit-reproducible under a fixed seed, and wall-clock
latency figures (median / p99 nanoseconds per lookup) that are inherently
noisy.  Claims that must be pass/fail are asserted on the counters.

Removal order ``random`` draws one seeded shuffle of the initial bucket
ids, so every algorithm in a run sees the identical removal sequence.
The jump engine only shrinks at the tail, so combining it with random
removals is a configuration error.
"""

from __future__ import annotations

import csv
import io
import random
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .engines import AnchorEngine, DxEngine, JumpEngine
from .memento import MementoHash

SCENARIOS = ("stable", "oneshot", "incremental", "sensitivity")
ALGORITHMS = ("memento", "jump", "anchor", "dx")
METRICS = (
    "lookup_ns_median",
    "lookup_ns_p99",
    "ext_iter_mean",
    "int_iter_mean",
    "memory_entries",
    "memory_bytes_est",
)
INCREMENTAL_FRACTIONS = tuple(round(0.05 * i, 2) for i in range(1, 19))
SENSITIVITY_RATIOS = (5, 10, 20, 50, 100)

# sizes swept by default at desk scale; larger sizes stay available by flag
DEFAULT_SIZES = (10, 100, 1_000, 10_000, 100_000)


class ConfigError(ValueError):
    """A scenario configuration violates its invariants."""


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    algorithms: tuple[str, ...]
    initial_size: int
    removal_fraction: float = 0.0
    removal_order: str = "lifo"
    capacity_ratio: float = 10.0
    key_count: int = 100_000
    seed: int = 0
    repetitions: int = 5

    def validate(self) -> None:
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario: {self.scenario!r}")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown or not self.algorithms:
            raise ConfigError(f"bad algorithm list: {self.algorithms!r}")
        if self.initial_size < 1:
            raise ConfigError("initial size must be positive")
        if not 0.0 <= self.removal_fraction < 1.0:
            raise ConfigError("removal fraction must lie in [0, 1)")
        if self.removal_order not in ("lifo", "random"):
            raise ConfigError(f"unknown removal order: {self.removal_order!r}")
        if self.capacity_ratio < 1.0:
            raise ConfigError("capacity ratio must be at least 1")
        if self.key_count < 1 or self.repetitions < 1:
            raise ConfigError("key count and repetitions must be positive")
        removes = self.scenario in ("incremental",) or self.removal_fraction > 0.0
        if "jump" in self.algorithms and self.removal_order == "random" and removes:
            raise ConfigError("jump cannot remove buckets in random order")


@dataclass(frozen=True)
class MetricRecord:
    algorithm: str
    scenario: str
    w_initial: int
    removed_count: int
    removal_order: str
    capacity_ratio: float | None
    metric: str
    value: float
    unit: str
    seed: int
    repetition: int


CSV_COLUMNS = tuple(f.name for f in fields(MetricRecord))


def build_engine(name: str, working: int, capacity_ratio: float):
    if name == "memento":
        return MementoHash(working)
    if name == "jump":
        return JumpEngine(working)
    if name == "anchor":
        return AnchorEngine(int(round(capacity_ratio * working)), working)
    if name == "dx":
        return DxEngine(int(round(capacity_ratio * working)), working)
    raise ConfigError(f"unknown algorithm: {name!r}")


def removal_sequence(working: int, order: str, seed: int) -> list[int]:
    """Bucket removal order: tail-first for lifo, seeded shuffle otherwise."""
    if order == "lifo":
        return list(range(working - 1, -1, -1))
    ids = list(range(working))
    random.Random(seed).shuffle(ids)
    return ids


def measure_lookup_latency(engine, keys, repetitions: int = 1) -> tuple[float, float]:
    """Median and p99 nanoseconds per lookup, batch-amortized.

    Runs one warmup batch (discarded), then ``repetitions`` timed passes
    over ``keys``; each batch of lookups yields one per-lookup sample on
    the monotonic clock, and the percentiles are taken over all samples.
    """
    keys = [int(k) for k in keys]
    batch = max(1, min(256, len(keys) // 8 or 1))
    lookup = engine.lookup
    for key in keys[:batch]:  # warmup
        lookup(key)
    samples = []
    for _ in range(repetitions):
        for start in range(0, len(keys) - batch + 1, batch):
            chunk = keys[start : start + batch]
            t0 = time.perf_counter_ns()
            for key in chunk:
                lookup(key)
            dt = time.perf_counter_ns() - t0
            samples.append(dt / len(chunk))
    return float(np.median(samples)), float(np.percentile(samples, 99))


def measure_memory(engine) -> tuple[int, int]:
    """Implementation-independent entry count plus a bytes estimate."""
    return engine.memory_entries, engine.memory_bytes_estimate


def _measure_point(
    engine,
    config: ScenarioConfig,
    removed: int,
    ratio: float | None,
    keys: np.ndarray,
    latency_keys,
) -> list[MetricRecord]:
    def record(metric, value, unit, rep):
        return MetricRecord(
            algorithm=_engine_name(engine),
            scenario=config.scenario,
            w_initial=config.initial_size,
            removed_count=removed,
            removal_order=config.removal_order,
            capacity_ratio=ratio,
            metric=metric,
            value=float(value),
            unit=unit,
            seed=config.seed,
            repetition=rep,
        )

    _, ext, inner, _ = engine.lookup_many_traced(keys)
    entries, est_bytes = measure_memory(engine)
    records = [
        record("ext_iter_mean", ext.mean(), "iterations", 0),
        record("int_iter_mean", inner.mean(), "iterations", 0),
        record("memory_entries", entries, "entries", 0),
        record("memory_bytes_est", est_bytes, "bytes", 0),
    ]
    for rep in range(config.repetitions):
        median, p99 = measure_lookup_latency(engine, latency_keys, repetitions=1)
        records.append(record("lookup_ns_median", median, "ns", rep))
        records.append(record("lookup_ns_p99", p99, "ns", rep))
    return records


def _engine_name(engine) -> str:
    return {
        MementoHash: "memento",
        JumpEngine: "jump",
        AnchorEngine: "anchor",
        DxEngine: "dx",
    }[type(engine)]


# up to this many keys go through the timed scalar loops per repetition
LATENCY_KEY_CAP = 20_000


def run_scenario(config: ScenarioConfig) -> list[MetricRecord]:
    """Run one scenario; deterministic under the seed except wall-clock values."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    keys = rng.integers(0, 1 << 64, size=config.key_count, dtype=np.uint64)
    latency_keys = keys[: min(config.key_count, LATENCY_KEY_CAP)].tolist()
    w = config.initial_size
    order = removal_sequence(w, config.removal_order, config.seed)
    records: list[MetricRecord] = []
    for name in config.algorithms:
        if config.scenario == "stable":
            engine = build_engine(name, w, config.capacity_ratio)
            ratio = config.capacity_ratio if name in ("anchor", "dx") else None
            records += _measure_point(engine, config, 0, ratio, keys, latency_keys)
        elif config.scenario == "oneshot":
            engine = build_engine(name, w, config.capacity_ratio)
            count = int(config.removal_fraction * w)
            for b in order[:count]:
                engine.remove(b)
            ratio = config.capacity_ratio if name in ("anchor", "dx") else None
            records += _measure_point(engine, config, count, ratio, keys, latency_keys)
        elif config.scenario == "incremental":
            engine = build_engine(name, w, config.capacity_ratio)
            ratio = config.capacity_ratio if name in ("anchor", "dx") else None
            done = 0
            for fraction in INCREMENTAL_FRACTIONS:
                target = int(fraction * w)
                for b in order[done:target]:
                    engine.remove(b)
                done = target
                records += _measure_point(engine, config, done, ratio, keys, latency_keys)
        else:  # sensitivity
            count = int(config.removal_fraction * w)
            for ratio in SENSITIVITY_RATIOS:
                engine = build_engine(name, w, float(ratio))
                for b in order[:count]:
                    engine.remove(b)
                records += _measure_point(
                    engine, config, count, float(ratio), keys, latency_keys
                )
    return records


# -- CSV ---------------------------------------------------------------------


def emit_csv(records: list[MetricRecord], destination) -> int:
    """Write records as RFC-4180 CSV; returns the byte count written.

    ``destination`` may be a path or a text file object.  Column order
    follows the MetricRecord field order; a None capacity ratio becomes an
    empty cell.
    """
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for rec in records:
        row = [getattr(rec, col) for col in CSV_COLUMNS]
        writer.writerow(["" if v is None else v for v in row])
    text = buffer.getvalue()
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        Path(destination).write_text(text, encoding="utf-8")
    return len(text.encode("utf-8"))


def load_csv(source) -> list[MetricRecord]:
    """Parse a CSV produced by :func:`emit_csv` back into records."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = Path(source).read_text(encoding="utf-8")
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV header: {header!r}")
    records = []
    for row in reader:
        data = dict(zip(CSV_COLUMNS, row))
        records.append(
            MetricRecord(
                algorithm=data["algorithm"],
                scenario=data["scenario"],
                w_initial=int(data["w_initial"]),
                removed_count=int(data["removed_count"]),
                removal_order=data["removal_order"],
                capacity_ratio=float(data["capacity_ratio"]) if data["capacity_ratio"] else None,
                metric=data["metric"],
                value=float(data["value"]),
                unit=data["unit"],
                seed=int(data["seed"]),
                repetition=int(data["repetition"]),
            )
        )
    return records
