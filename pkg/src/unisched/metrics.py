"""Utilization, wait-time, and rescued-resource metrics over a simulation.

All node-second accounting is integer-exact.  Utilization comes in two
variants: "allocated" counts min-alloc rounding waste as busy (what the
scheduler sees); "effective" counts only the nodes a job asked for.
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .model import (
    AllocationInterval,
    Bin,
    QueueClass,
    SimulationResult,
    bin_index,
    bin_label,
)

DAY = 86_400

# Size bins drawn from the thresholds quoted for each workload class.
CAPABILITY_SIZE_BINS: tuple[Bin, ...] = (
    (1, 128), (129, 256), (257, 512), (513, 1024), (1025, None),
)
CAPACITY_SIZE_BINS: tuple[Bin, ...] = (
    (1, 1), (2, 32), (33, 128), (129, None),
)
# Runtime bin edges: 10 min, 30 min, 1 h, 2 h, 4.17 h, 8.3 h.
RUNTIME_BINS: tuple[Bin, ...] = (
    (1, 600),
    (601, 1800),
    (1801, 3600),
    (3601, 7200),
    (7201, 15012),
    (15013, 29880),
    (29881, None),
)


class UtilizationVariant(str, Enum):
    ALLOCATED = "allocated"
    EFFECTIVE = "effective"


@dataclass(frozen=True, slots=True)
class UtilizationSeries:
    """Per-bucket busy fraction of the machine."""

    bucket: int
    start: int
    variant: UtilizationVariant
    node_seconds: tuple[int, ...]
    values: tuple[float, ...]

    def mean(self) -> float:
        return statistics.fmean(self.values) if self.values else 0.0


@dataclass(frozen=True, slots=True)
class WaitStats:
    """Wait-time statistics for one job group.

    ``degenerate`` flags single-job groups, whose standard error is
    reported as 0.
    """

    key: tuple[str, ...]
    count: int
    mean_wait: float
    stdev: float
    stderr: float
    ci95_half_width: float
    degenerate: bool = False


def _bucket_spans(t0: int, t1: int, bucket: int) -> list[int]:
    """Width of each bucket covering [t0, t1); the last may be partial."""
    if t1 <= t0:
        return [bucket]
    n = -(-(t1 - t0) // bucket)
    widths = [bucket] * n
    rem = (t1 - t0) - (n - 1) * bucket
    widths[-1] = rem
    return widths


def _accumulate(
    intervals: Sequence[AllocationInterval],
    t0: int,
    t1: int,
    bucket: int,
    n_buckets: int,
    use_allocated: bool,
    keep: Optional[set[int]] = None,
) -> list[int]:
    """Busy node-seconds per bucket; ``keep`` filters by interval identity."""
    busy = [0] * n_buckets
    for i, iv in enumerate(intervals):
        if keep is not None and i not in keep:
            continue
        nodes = iv.allocated_nodes if use_allocated else iv.used_nodes
        s = max(iv.start_time, t0)
        e = min(iv.end_time, t1)
        if e <= s:
            continue
        b0 = (s - t0) // bucket
        b1 = (e - 1 - t0) // bucket
        if b0 == b1:
            busy[b0] += nodes * (e - s)
            continue
        edge0 = t0 + (b0 + 1) * bucket
        busy[b0] += nodes * (edge0 - s)
        for b in range(b0 + 1, b1):
            busy[b] += nodes * bucket
        busy[b1] += nodes * (e - (t0 + b1 * bucket))
    return busy


def _span(result: SimulationResult, truncate_at_last_arrival: bool) -> tuple[int, int]:
    t0, t1 = result.span
    if truncate_at_last_arrival and result.records:
        t1 = max(r.arrival_time for r in result.records)
    return t0, max(t1, t0 + 1)


def utilization_series(
    result: SimulationResult,
    bucket: int = DAY,
    variant: UtilizationVariant = UtilizationVariant.ALLOCATED,
    truncate_at_last_arrival: bool = False,
) -> UtilizationSeries:
    """Busy fraction per bucket over the simulated span.

    The span runs from the first arrival to the last completion (the drain
    period included) unless ``truncate_at_last_arrival`` is set.  Partial
    final buckets are normalized by their actual width.
    """
    if not result.records:
        raise ValueError("cannot compute utilization of an empty result")
    if bucket <= 0:
        raise ValueError("bucket width must be positive")
    variant = UtilizationVariant(variant)
    t0, t1 = _span(result, truncate_at_last_arrival)
    widths = _bucket_spans(t0, t1, bucket)
    busy = _accumulate(
        result.intervals,
        t0,
        t1,
        bucket,
        len(widths),
        use_allocated=variant is UtilizationVariant.ALLOCATED,
    )
    total = result.machine.total_nodes
    values = tuple(b / (total * w) for b, w in zip(busy, widths))
    return UtilizationSeries(
        bucket=bucket,
        start=t0,
        variant=variant,
        node_seconds=tuple(busy),
        values=values,
    )


def wait_stats(
    result: SimulationResult,
    by_source: bool = True,
    size_bins: Optional[Sequence[Bin]] = None,
    runtime_bins: Optional[Sequence[Bin]] = None,
) -> list[WaitStats]:
    """Wait-time statistics grouped by source tag and/or bin membership.

    Runtime binning uses the realized (walltime-capped) runtime of each
    job record.  Groups with no members are omitted.
    """
    groups: dict[tuple[str, ...], list[int]] = {}
    for r in result.records:
        key: list[str] = []
        if by_source:
            key.append(r.source.value)
        if size_bins is not None:
            si = bin_index(r.requested_nodes, size_bins)
            if si is None:
                raise ValueError(f"size bins do not cover {r.requested_nodes}")
            key.append(bin_label(size_bins[si]))
        if runtime_bins is not None:
            runtime = r.end_time - r.start_time
            ri = bin_index(runtime, runtime_bins)
            if ri is None:
                raise ValueError(f"runtime bins do not cover {runtime}")
            key.append(bin_label(runtime_bins[ri]))
        groups.setdefault(tuple(key), []).append(r.wait_time)

    out: list[WaitStats] = []
    for key in sorted(groups):
        waits = groups[key]
        n = len(waits)
        mean = statistics.fmean(waits)
        if n > 1:
            sd = statistics.stdev(waits)
            se = sd / math.sqrt(n)
            degenerate = False
        else:
            sd = se = 0.0
            degenerate = True
        out.append(
            WaitStats(
                key=key,
                count=n,
                mean_wait=mean,
                stdev=sd,
                stderr=se,
                ci95_half_width=1.96 * se,
                degenerate=degenerate,
            )
        )
    return out


def rescued_resource(
    result: SimulationResult,
    bucket: int = DAY,
    truncate_at_last_arrival: bool = False,
) -> list[Optional[float]]:
    """Per-bucket percentage of capability waste consumed by injected jobs.

    Waste is the machine's node-seconds minus those allocated to
    default-class (capability) jobs, measured within the injected run so
    the metric is bounded in [0, 100].  Buckets with zero waste report
    ``None``.
    """
    if not any(r.queue_class is QueueClass.BACKFILL for r in result.records):
        raise ValueError("rescued_resource requires an injection run")
    t0, t1 = _span(result, truncate_at_last_arrival)
    widths = _bucket_spans(t0, t1, bucket)
    keep_default = {
        i
        for i, iv in enumerate(result.intervals)
        if iv.queue_class is QueueClass.DEFAULT
    }
    keep_injected = set(range(len(result.intervals))) - keep_default
    cap = _accumulate(
        result.intervals, t0, t1, bucket, len(widths), True, keep=keep_default
    )
    inj = _accumulate(
        result.intervals, t0, t1, bucket, len(widths), True, keep=keep_injected
    )
    total = result.machine.total_nodes
    out: list[Optional[float]] = []
    for c, i, w in zip(cap, inj, widths):
        waste = total * w - c
        out.append(None if waste == 0 else 100.0 * i / waste)
    return out
