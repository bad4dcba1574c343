"""Core domain types shared by every other module.

Time is integer seconds throughout; traces are normalized so the earliest
arrival is t=0.  Jobs are rigid rectangles of (nodes x time): no node
heterogeneity, placement, or power modeling.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Optional


class Source(str, Enum):
    """Trace of origin for a job."""

    CAPABILITY = "capability"
    CAPACITY = "capacity"


class QueueClass(str, Enum):
    """Which scheduler queue a job is submitted to.

    Default-class jobs are subject to minimum-allocation rounding;
    backfill-class (injected) jobs are not, so that sub-minimum jobs can
    fill spatial holes.
    """

    DEFAULT = "default"
    BACKFILL = "backfill"


@dataclass(frozen=True, slots=True)
class Job:
    """One trace record.

    ``requested_walltime`` is the user-supplied runtime limit; the runtime
    actually simulated is ``min(actual_runtime, requested_walltime)``
    (walltime-kill semantics, see :func:`effective_runtime`).
    """

    id: int
    arrival_time: int
    requested_nodes: int
    requested_walltime: int
    actual_runtime: int
    source: Source = Source.CAPABILITY
    queue_class: QueueClass = QueueClass.DEFAULT

    def __post_init__(self) -> None:
        if self.requested_nodes < 1:
            raise ValueError(f"job {self.id}: requested_nodes must be >= 1")
        if self.requested_walltime <= 0:
            raise ValueError(f"job {self.id}: requested_walltime must be > 0")
        if self.actual_runtime <= 0:
            raise ValueError(f"job {self.id}: actual_runtime must be > 0")
        if self.arrival_time < 0:
            raise ValueError(f"job {self.id}: arrival_time must be >= 0")


@dataclass(frozen=True, slots=True)
class Machine:
    """A homogeneous cluster: total node count plus minimum allocation size.

    ``min_alloc`` of 0 or 1 disables rounding.
    """

    total_nodes: int
    min_alloc: int = 0

    def __post_init__(self) -> None:
        if self.min_alloc < 0:
            raise ValueError("min_alloc must be >= 0")
        if self.total_nodes < max(1, self.min_alloc):
            raise ValueError("total_nodes must be >= min_alloc and >= 1")


def min_alloc_round(requested_nodes: int, machine: Machine) -> int:
    """Round a request up to the machine's minimum allocation size.

    The difference between the rounded allocation and the request is waste,
    tracked per allocation interval.
    """
    if requested_nodes < 1:
        raise ValueError("requested_nodes must be >= 1")
    return max(requested_nodes, machine.min_alloc)


def effective_runtime(job: Job) -> int:
    """Runtime actually simulated: the job is killed at its walltime."""
    return min(job.actual_runtime, job.requested_walltime)


@dataclass(frozen=True, slots=True)
class AllocationInterval:
    """A contiguous occupancy of ``allocated_nodes`` nodes by one job.

    ``used_nodes`` equals the job's request; the allocated excess (from
    min-alloc rounding) is waste.
    """

    job_id: int
    start_time: int
    end_time: int
    allocated_nodes: int
    used_nodes: int
    queue_class: QueueClass = QueueClass.DEFAULT

    def __post_init__(self) -> None:
        if self.start_time >= self.end_time:
            raise ValueError("start_time must be < end_time")
        if self.used_nodes > self.allocated_nodes:
            raise ValueError("used_nodes must be <= allocated_nodes")


@dataclass(frozen=True, slots=True)
class JobRecord:
    """Per-job outcome of a simulation run."""

    job_id: int
    arrival_time: int
    start_time: int
    end_time: int
    requested_nodes: int
    allocated_nodes: int
    source: Source
    queue_class: QueueClass
    # Shadow time of the first reservation held for this job while it was
    # the blocked queue head, if any.  Start must never exceed it.
    first_shadow: Optional[int] = None

    @property
    def wait_time(self) -> int:
        return self.start_time - self.arrival_time


@dataclass(slots=True)
class SimulationResult:
    """Full outcome of one simulation: job records plus allocation intervals.

    ``span`` runs from the first scheduled arrival to the last completion.
    ``unschedulable`` lists ids of jobs larger than the machine that were
    flagged and excluded.
    """

    machine: Machine
    records: list[JobRecord]
    intervals: list[AllocationInterval]
    span: tuple[int, int]
    unschedulable: tuple[int, ...] = ()

    def max_concurrent_allocation(self) -> int:
        """Peak simultaneous allocation, via a sweep over interval endpoints."""
        events: list[tuple[int, int]] = []
        for iv in self.intervals:
            events.append((iv.start_time, iv.allocated_nodes))
            events.append((iv.end_time, -iv.allocated_nodes))
        events.sort()
        peak = cur = 0
        for _, delta in events:
            cur += delta
            if cur > peak:
                peak = cur
        return peak

    def serialize(self) -> str:
        """Deterministic textual form, used for byte-identity checks."""
        lines = [
            f"machine,{self.machine.total_nodes},{self.machine.min_alloc}",
            f"span,{self.span[0]},{self.span[1]}",
            "unschedulable," + ",".join(str(i) for i in self.unschedulable),
        ]
        for r in self.records:
            shadow = "" if r.first_shadow is None else str(r.first_shadow)
            lines.append(
                f"R,{r.job_id},{r.arrival_time},{r.start_time},{r.end_time},"
                f"{r.requested_nodes},{r.allocated_nodes},{r.source.value},"
                f"{r.queue_class.value},{shadow}"
            )
        for iv in self.intervals:
            lines.append(
                f"I,{iv.job_id},{iv.start_time},{iv.end_time},"
                f"{iv.allocated_nodes},{iv.used_nodes},{iv.queue_class.value}"
            )
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Bin helpers shared by characterization and wait-time grouping.
# A bin is an inclusive integer range (lo, hi); hi=None means open-ended.

Bin = tuple[int, Optional[int]]


def bin_label(b: Bin) -> str:
    lo, hi = b
    if hi is None:
        return f">={lo}"
    if lo == hi:
        return str(lo)
    return f"{lo}-{hi}"


def bin_index(value: int, bins: Iterable[Bin]) -> Optional[int]:
    """Index of the bin containing ``value``, or None if uncovered."""
    for i, (lo, hi) in enumerate(bins):
        if value >= lo and (hi is None or value <= hi):
            return i
    return None
