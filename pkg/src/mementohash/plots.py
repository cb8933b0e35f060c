"""Render benchmark figures (PNG) from metric records.

One figure per (scenario, metric) pair present in the records.  The x axis
depends on the scenario: initial size for stable/oneshot runs, removed
fraction for incremental sweeps, capacity ratio for sensitivity sweeps.
Latency metrics are reduced to the median over repetitions per point.
"""

from __future__ import annotations

from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bench import MetricRecord

_UNIT_LABEL = {
    "ns": "nanoseconds per lookup",
    "iterations": "iterations per lookup",
    "entries": "entries",
    "bytes": "bytes (estimated)",
}


def _x_value(record: MetricRecord) -> float:
    if record.scenario == "incremental":
        return record.removed_count / record.w_initial
    if record.scenario == "sensitivity":
        return record.capacity_ratio or 1.0
    return record.w_initial


_X_LABEL = {
    "stable": "initial working buckets",
    "oneshot": "initial working buckets",
    "incremental": "removed fraction",
    "sensitivity": "capacity / working ratio",
}


def render_figures(records: list[MetricRecord], out_dir) -> list[Path]:
    """Write one PNG per (scenario, metric); returns the created paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple[str, str], list[MetricRecord]] = defaultdict(list)
    for rec in records:
        groups[(rec.scenario, rec.metric)].append(rec)
    paths = []
    for (scenario, metric), recs in sorted(groups.items()):
        series: dict[str, dict[float, list[float]]] = defaultdict(lambda: defaultdict(list))
        for rec in recs:
            series[rec.algorithm][_x_value(rec)].append(rec.value)
        fig, ax = plt.subplots(figsize=(6.4, 4.0))
        for algorithm in sorted(series):
            points = sorted(series[algorithm].items())
            xs = [x for x, _ in points]
            ys = [float(np.median(vals)) for _, vals in points]
            ax.plot(xs, ys, marker="o", label=algorithm)
        if scenario in ("stable", "oneshot", "sensitivity") and len({x for s in series.values() for x in s}) > 1:
            ax.set_xscale("log")
        if metric.startswith("lookup_ns") or metric.startswith("memory"):
            positive = all(v > 0 for s in series.values() for vals in s.values() for v in vals)
            if positive:
                ax.set_yscale("log")
        ax.set_xlabel(_X_LABEL[scenario])
        unit = recs[0].unit
        ax.set_ylabel(_UNIT_LABEL.get(unit, unit))
        ax.set_title(f"{scenario}: {metric}")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend()
        path = out / f"{scenario}_{metric}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=120)
        plt.close(fig)
        paths.append(path)
    return paths
