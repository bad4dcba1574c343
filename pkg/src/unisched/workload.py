"""Workload ingestion, filtering, merging, characterization, and synthesis.

Supported trace formats:
  * SWF: the 18-field whitespace-separated Standard Workload Format
    (';' comment lines ignored).
  * CSV: header row ``id,arrival,nodes,walltime,runtime``.

Arrival timestamps are normalized at parse time so the earliest arrival
is t=0.
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .model import Bin, Job, Source, bin_index, bin_label

log = logging.getLogger(__name__)


class WorkloadError(Exception):
    """Unreadable trace, unknown format, or no valid records."""


class TraceFormat(str, Enum):
    SWF = "swf"
    CSV = "csv"


@dataclass(frozen=True, slots=True)
class Workload:
    """A sequence of jobs sorted by arrival time (ties broken by id)."""

    jobs: tuple[Job, ...]
    label: str = ""
    dropped: int = 0

    def __post_init__(self) -> None:
        prev = (-1, -1)
        seen: set[int] = set()
        for j in self.jobs:
            key = (j.arrival_time, j.id)
            if key < prev:
                raise ValueError("jobs must be sorted by (arrival_time, id)")
            prev = key
            if j.id in seen:
                raise ValueError(f"duplicate job id {j.id}")
            seen.add(j.id)

    def __len__(self) -> int:
        return len(self.jobs)


def _normalize(jobs: list[Job]) -> list[Job]:
    """Shift arrivals so the earliest is t=0 and sort by (arrival, id)."""
    if not jobs:
        return jobs
    t0 = min(j.arrival_time for j in jobs)
    if t0:
        jobs = [replace(j, arrival_time=j.arrival_time - t0) for j in jobs]
    jobs.sort(key=lambda j: (j.arrival_time, j.id))
    return jobs


# SWF field indices (0-based): job id, submit time, run time, allocated
# processors, requested processors, requested time.
_SWF_ID, _SWF_SUBMIT, _SWF_RUNTIME = 0, 1, 3
_SWF_ALLOC_PROCS, _SWF_REQ_PROCS, _SWF_REQ_TIME = 4, 7, 8
_SWF_NUM_FIELDS = 18

_CSV_HEADER = ["id", "arrival", "nodes", "walltime", "runtime"]


def _parse_swf_lines(lines: Sequence[str]) -> tuple[list[Job], int]:
    jobs: list[Job] = []
    dropped = 0
    seen: set[int] = set()
    for line in lines:
        line = line.strip()
        if not line or line.startswith(";"):
            continue
        fields = line.split()
        if len(fields) < _SWF_NUM_FIELDS:
            dropped += 1
            continue
        try:
            job_id = int(fields[_SWF_ID])
            submit = int(float(fields[_SWF_SUBMIT]))
            runtime = int(float(fields[_SWF_RUNTIME]))
            alloc_procs = int(fields[_SWF_ALLOC_PROCS])
            req_procs = int(fields[_SWF_REQ_PROCS])
            req_time = int(float(fields[_SWF_REQ_TIME]))
        except ValueError:
            dropped += 1
            continue
        # Processors map 1:1 to nodes; prefer the request, fall back to the
        # actual allocation when the request is a -1 sentinel.
        nodes = req_procs if req_procs > 0 else alloc_procs
        # A missing requested time falls back to the actual runtime.
        walltime = req_time if req_time > 0 else runtime
        if runtime <= 0 or nodes <= 0 or submit < 0 or job_id in seen:
            dropped += 1
            continue
        seen.add(job_id)
        jobs.append(
            Job(
                id=job_id,
                arrival_time=submit,
                requested_nodes=nodes,
                requested_walltime=walltime,
                actual_runtime=runtime,
            )
        )
    return jobs, dropped


def _parse_csv_lines(text: io.TextIOBase) -> tuple[list[Job], int]:
    reader = csv.DictReader(text)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != _CSV_HEADER:
        raise WorkloadError(
            f"CSV trace must have header {','.join(_CSV_HEADER)!r}"
        )
    jobs: list[Job] = []
    dropped = 0
    seen: set[int] = set()
    for row in reader:
        try:
            job_id = int(row["id"])
            arrival = int(row["arrival"])
            nodes = int(row["nodes"])
            walltime = int(row["walltime"])
            runtime = int(row["runtime"])
        except (TypeError, ValueError):
            dropped += 1
            continue
        if runtime <= 0 or nodes <= 0 or walltime <= 0 or arrival < 0 or job_id in seen:
            dropped += 1
            continue
        seen.add(job_id)
        jobs.append(
            Job(
                id=job_id,
                arrival_time=arrival,
                requested_nodes=nodes,
                requested_walltime=walltime,
                actual_runtime=runtime,
            )
        )
    return jobs, dropped


def parse_trace(
    path: str | Path,
    fmt: TraceFormat | str,
    source: Source = Source.CAPABILITY,
    label: Optional[str] = None,
) -> Workload:
    """Read a trace file, dropping and counting invalid records."""
    fmt = TraceFormat(fmt)
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise WorkloadError(f"cannot read trace {path}: {exc}") from exc
    if fmt is TraceFormat.SWF:
        jobs, dropped = _parse_swf_lines(text.splitlines())
    else:
        jobs, dropped = _parse_csv_lines(io.StringIO(text))
    if not jobs:
        raise WorkloadError(f"no valid records in {path}")
    if dropped:
        log.warning("dropped %d invalid records from %s", dropped, path)
    jobs = [replace(j, source=source) for j in jobs]
    return Workload(
        jobs=tuple(_normalize(jobs)),
        label=label if label is not None else path.stem,
        dropped=dropped,
    )


def serialize_csv(workload: Workload) -> str:
    """CSV text for a workload; :func:`parse_trace` round-trips it."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(_CSV_HEADER)
    for j in workload.jobs:
        writer.writerow(
            [j.id, j.arrival_time, j.requested_nodes, j.requested_walltime, j.actual_runtime]
        )
    return out.getvalue()


def write_csv(workload: Workload, path: str | Path) -> None:
    Path(path).write_text(serialize_csv(workload))


def filter_workload(
    workload: Workload,
    max_nodes: Optional[int] = None,
    max_runtime: Optional[int] = None,
) -> Workload:
    """Keep jobs within the node and runtime thresholds (both inclusive).

    Thresholds apply to requested nodes and actual runtime.
    """
    if max_nodes is not None and max_nodes <= 0:
        raise ValueError("max_nodes must be positive")
    if max_runtime is not None and max_runtime <= 0:
        raise ValueError("max_runtime must be positive")
    kept = tuple(
        j
        for j in workload.jobs
        if (max_nodes is None or j.requested_nodes <= max_nodes)
        and (max_runtime is None or j.actual_runtime <= max_runtime)
    )
    log.info("filter retained %d of %d jobs (%s)", len(kept), len(workload.jobs), workload.label)
    return Workload(jobs=kept, label=workload.label, dropped=workload.dropped)


def merge_workloads(a: Workload, b: Workload) -> Workload:
    """Merge two workloads by arrival time onto one timeline.

    Ties are broken capability-before-capacity, then by original id; ids
    are re-assigned to be globally unique while source tags are preserved.
    """
    def rank(j: Job) -> int:
        return 0 if j.source is Source.CAPABILITY else 1

    tagged = [(j.arrival_time, rank(j), 0, j.id, j) for j in a.jobs]
    tagged += [(j.arrival_time, rank(j), 1, j.id, j) for j in b.jobs]
    tagged.sort(key=lambda t: t[:4])
    merged = tuple(
        replace(j, id=i) for i, (_, _, _, _, j) in enumerate(tagged)
    )
    label = f"{a.label}+{b.label}" if a.label or b.label else "merged"
    return Workload(jobs=merged, label=label)


# ---------------------------------------------------------------------------
# Synthetic generation

# Each bin is (lo, hi, probability) with lo/hi inclusive integer bounds.
CatBin = tuple[int, int, float]


@dataclass(frozen=True, slots=True)
class SynthSpec:
    """Parameters for a synthetic workload.

    Arrivals follow a Poisson process; sizes and runtimes are drawn from
    piecewise categorical distributions (uniform within each bin).  The
    requested walltime is the runtime scaled by a uniform factor drawn
    from ``walltime_factor``.
    """

    job_count: int
    arrival_rate_per_hour: float
    size_bins: tuple[CatBin, ...]
    runtime_bins: tuple[CatBin, ...]
    min_nodes: int = 1
    max_nodes: Optional[int] = None
    walltime_factor: tuple[float, float] = (1.0, 2.0)
    seed: int = 0
    label: str = "synthetic"
    source: Source = Source.CAPACITY

    def __post_init__(self) -> None:
        if self.job_count < 1:
            raise ValueError("job_count must be >= 1")
        if self.arrival_rate_per_hour <= 0:
            raise ValueError("arrival_rate_per_hour must be > 0")
        for name, bins in (("size_bins", self.size_bins), ("runtime_bins", self.runtime_bins)):
            if not bins:
                raise ValueError(f"{name} must be non-empty")
            total = sum(p for _, _, p in bins)
            if abs(total - 1.0) > 1e-9:
                raise ValueError(f"{name} probabilities sum to {total}, expected 1")
            for lo, hi, p in bins:
                if lo > hi or p < 0:
                    raise ValueError(f"degenerate bin ({lo}, {hi}, {p}) in {name}")
        if self.max_nodes is not None and self.min_nodes > self.max_nodes:
            raise ValueError("min_nodes must be <= max_nodes")


def _sample_bins(rng: np.random.Generator, bins: tuple[CatBin, ...], n: int) -> np.ndarray:
    probs = np.array([p for _, _, p in bins], dtype=float)
    probs /= probs.sum()
    idx = rng.choice(len(bins), size=n, p=probs)
    lo = np.array([b[0] for b in bins], dtype=np.int64)[idx]
    hi = np.array([b[1] for b in bins], dtype=np.int64)[idx]
    return rng.integers(lo, hi + 1)


def synthesize(spec: SynthSpec) -> Workload:
    """Deterministically generate a workload from a spec."""
    rng = np.random.default_rng(spec.seed)
    n = spec.job_count
    inter = rng.exponential(3600.0 / spec.arrival_rate_per_hour, size=n)
    arrivals = np.floor(np.cumsum(inter)).astype(np.int64)
    arrivals -= arrivals[0]
    sizes = _sample_bins(rng, spec.size_bins, n)
    sizes = np.clip(sizes, spec.min_nodes, spec.max_nodes)
    runtimes = np.maximum(_sample_bins(rng, spec.runtime_bins, n), 1)
    lo_f, hi_f = spec.walltime_factor
    walltimes = np.maximum(
        np.round(runtimes * rng.uniform(lo_f, hi_f, size=n)).astype(np.int64),
        runtimes,
    )
    jobs = tuple(
        Job(
            id=i,
            arrival_time=a,
            requested_nodes=s,
            requested_walltime=w,
            actual_runtime=r,
            source=spec.source,
        )
        for i, (a, s, w, r) in enumerate(
            zip(arrivals.tolist(), sizes.tolist(), walltimes.tolist(), runtimes.tolist())
        )
    )
    return Workload(jobs=jobs, label=spec.label)


def capability_preset(
    job_count: int,
    seed: int = 0,
    arrival_rate_per_hour: float = 2.7,
) -> SynthSpec:
    """Capability-like workload: sizes >= 128, 79% of runtimes over one hour,
    nothing under ten minutes."""
    return SynthSpec(
        job_count=job_count,
        arrival_rate_per_hour=arrival_rate_per_hour,
        size_bins=(
            (128, 128, 0.49),
            (129, 256, 0.20),
            (257, 512, 0.15),
            (513, 1024, 0.12),
            (1025, 4096, 0.04),
        ),
        runtime_bins=(
            (600, 3600, 0.21),
            (3601, 10800, 0.55),
            (10801, 43200, 0.20),
            (43201, 86400, 0.04),
        ),
        min_nodes=128,
        max_nodes=4096,
        seed=seed,
        label="capability-like",
        source=Source.CAPABILITY,
    )


def capacity_preset(
    job_count: int,
    seed: int = 0,
    arrival_rate_per_hour: float = 268.0,
) -> SynthSpec:
    """Capacity-like workload: 75% single-node, 96% at 32 nodes or fewer,
    60% of runtimes under one hour."""
    return SynthSpec(
        job_count=job_count,
        arrival_rate_per_hour=arrival_rate_per_hour,
        size_bins=(
            (1, 1, 0.75),
            (2, 32, 0.21),
            (33, 128, 0.03),
            (129, 512, 0.01),
        ),
        runtime_bins=(
            (60, 600, 0.30),
            (601, 3600, 0.30),
            (3601, 21600, 0.25),
            (21601, 86400, 0.15),
        ),
        min_nodes=1,
        seed=seed,
        label="capacity-like",
        source=Source.CAPACITY,
    )


PRESETS = {
    "capability-like": capability_preset,
    "capacity-like": capacity_preset,
}


def preset_spec(name: str, job_count: int, seed: int = 0, **kwargs) -> SynthSpec:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise WorkloadError(f"unknown preset {name!r}; known: {sorted(PRESETS)}") from None
    return factory(job_count, seed=seed, **kwargs)


# ---------------------------------------------------------------------------
# Characterization


@dataclass(frozen=True, slots=True)
class HistogramRow:
    label: str
    count: int
    percent: float


@dataclass(frozen=True, slots=True)
class Characterization:
    label: str
    size_rows: tuple[HistogramRow, ...]
    runtime_rows: tuple[HistogramRow, ...]


def characterize(
    workload: Workload,
    size_bins: Sequence[Bin],
    runtime_bins: Sequence[Bin],
) -> Characterization:
    """Per-bin counts and percentages of job sizes and actual runtimes."""
    total = len(workload.jobs)
    size_counts = [0] * len(size_bins)
    runtime_counts = [0] * len(runtime_bins)
    for j in workload.jobs:
        si = bin_index(j.requested_nodes, size_bins)
        if si is None:
            raise ValueError(f"size bins do not cover {j.requested_nodes}")
        size_counts[si] += 1
        ri = bin_index(j.actual_runtime, runtime_bins)
        if ri is None:
            raise ValueError(f"runtime bins do not cover {j.actual_runtime}")
        runtime_counts[ri] += 1

    def rows(bins: Sequence[Bin], counts: list[int]) -> tuple[HistogramRow, ...]:
        return tuple(
            HistogramRow(label=bin_label(b), count=c, percent=100.0 * c / total)
            for b, c in zip(bins, counts)
        )

    return Characterization(
        label=workload.label,
        size_rows=rows(size_bins, size_counts),
        runtime_rows=rows(runtime_bins, runtime_counts),
    )
