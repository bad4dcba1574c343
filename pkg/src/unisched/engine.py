"""Deterministic discrete-event simulation kernel.

Arrivals, completions, and optional re-sort ticks drive scheduling passes
over a dual-queue state: the default queue (policy-ordered, min-alloc
rounded) and the backfill queue (injected jobs in arrival order, scheduled
only as backfill so they can never delay a default head job).

Event ties at one instant are resolved completions first, then arrivals,
then ticks, so freed nodes are visible to same-instant arrivals; one
scheduling pass runs after all events at that instant.
"""
from __future__ import annotations

import heapq
import logging
import math
from bisect import bisect_left, insort
from dataclasses import dataclass, field, replace
from typing import Optional

from .backfill import Reservation, backfill_pass, compute_reservation
from .model import (
    AllocationInterval,
    Job,
    JobRecord,
    Machine,
    QueueClass,
    SimulationResult,
    effective_runtime,
    min_alloc_round,
)
from .policy import PolicyKind, wfp_score
from .workload import Workload

log = logging.getLogger(__name__)


@dataclass(slots=True)
class SchedulerState:
    """Mutable scheduler snapshot between events."""

    clock: int = 0
    free_nodes: int = 0
    # Default queue stays sorted by (arrival, id); WFP re-sorts per pass.
    default_queue: list[Job] = field(default_factory=list)
    backfill_queue: list[Job] = field(default_factory=list)
    # Sorted list of (walltime_end, start_seq, allocated_nodes).
    running: list[tuple[int, int, int]] = field(default_factory=list)
    reservation: Optional[Reservation] = None
    start_seq: int = 0
    # First-computed shadow time per default-queue head job, for the
    # no-delay guarantee.
    first_shadow: dict[int, int] = field(default_factory=dict)


def downsize(machine: Machine, fraction: float) -> Machine:
    """Shrink a machine to a percentage of its size; min_alloc unchanged."""
    if not 0 < fraction <= 100:
        raise ValueError("fraction must be in (0, 100]")
    total = math.floor(machine.total_nodes * fraction / 100 + 1e-9)
    if total < max(1, machine.min_alloc):
        raise ValueError(
            f"downsizing to {fraction}% yields {total} nodes, below min_alloc"
        )
    return Machine(total_nodes=total, min_alloc=machine.min_alloc)


def _alloc_for(job: Job, machine: Machine) -> int:
    # Min-alloc rounding applies to default-class jobs only.
    if job.queue_class is QueueClass.DEFAULT:
        return min_alloc_round(job.requested_nodes, machine)
    return job.requested_nodes


Started = tuple[Job, int, tuple[int, int, int]]


def schedule_pass(
    state: SchedulerState,
    machine: Machine,
    policy: PolicyKind,
) -> list[Started]:
    """One scheduling pass; returns (job, allocation, running entry) starts.

    Starts default-queue heads while they fit; when the head is blocked,
    computes its reservation and backfills over the remaining default jobs
    (policy order) then the backfill queue (arrival order).  Mutates the
    queues, free node count, running set, and reservation; the caller
    schedules completion events for the started jobs.
    """
    started: list[Started] = []
    now = state.clock
    queue = state.default_queue
    if policy is PolicyKind.WFP and len(queue) > 1:
        queue.sort(
            key=lambda j: (-wfp_score(j, now, machine), j.arrival_time, j.id)
        )

    def start(job: Job, alloc: int) -> None:
        state.free_nodes -= alloc
        entry = (now + job.requested_walltime, state.start_seq, alloc)
        state.start_seq += 1
        insort(state.running, entry)
        started.append((job, alloc, entry))

    # Start head jobs while they fit.
    k = 0
    while k < len(queue):
        head = queue[k]
        alloc = min_alloc_round(head.requested_nodes, machine)
        if alloc > state.free_nodes:
            break
        start(head, alloc)
        k += 1
    if k:
        del queue[:k]

    state.reservation = None
    if queue:
        head = queue[0]
        state.reservation = compute_reservation(
            head,
            [(end, alloc) for end, _, alloc in state.running],
            state.free_nodes,
            machine,
            now,
        )
        state.first_shadow.setdefault(head.id, state.reservation.shadow_time)

    if state.free_nodes > 0 and (state.reservation is not None or not queue):
        candidates = (queue[1:] + state.backfill_queue) if queue else state.backfill_queue
        selected = backfill_pass(
            candidates, state.reservation, state.free_nodes, now, machine
        )
        if selected:
            chosen_default = {j.id for j in selected if j.queue_class is QueueClass.DEFAULT}
            chosen_backfill = {j.id for j in selected if j.queue_class is QueueClass.BACKFILL}
            if chosen_default:
                state.default_queue[:] = [queue[0]] + [
                    j for j in queue[1:] if j.id not in chosen_default
                ]
            if chosen_backfill:
                state.backfill_queue[:] = [
                    j for j in state.backfill_queue if j.id not in chosen_backfill
                ]
            for job in selected:
                start(job, _alloc_for(job, machine))
    return started


def _retag(jobs: tuple[Job, ...], queue_class: QueueClass) -> list[Job]:
    return [
        j if j.queue_class is queue_class else replace(j, queue_class=queue_class)
        for j in jobs
    ]


def simulate(
    machine: Machine,
    default_workload: Optional[Workload],
    injected_workload: Optional[Workload] = None,
    policy: PolicyKind = PolicyKind.FCFS,
    resort_interval: int = 0,
) -> SimulationResult:
    """Run a full trace through the scheduler; deterministic for fixed inputs.

    Jobs whose allocation exceeds the machine are flagged as unschedulable
    and excluded with a warning.  ``resort_interval`` > 0 adds fixed-period
    tick events that trigger an extra (re-sorting) scheduling pass.
    """
    d_jobs = _retag(default_workload.jobs, QueueClass.DEFAULT) if default_workload else []
    i_jobs = _retag(injected_workload.jobs, QueueClass.BACKFILL) if injected_workload else []
    if not d_jobs and not i_jobs:
        raise ValueError("nothing to simulate: both workloads are empty")

    total = machine.total_nodes
    unschedulable: list[int] = []

    def admit(jobs: list[Job]) -> list[Job]:
        kept = []
        for j in jobs:
            if _alloc_for(j, machine) > total:
                unschedulable.append(j.id)
            else:
                kept.append(j)
        return kept

    d_jobs = admit(d_jobs)
    i_jobs = admit(i_jobs)
    if unschedulable:
        log.warning("%d jobs exceed the machine and were skipped", len(unschedulable))

    state = SchedulerState(free_nodes=total)
    records: list[JobRecord] = []
    intervals: list[AllocationInterval] = []
    # Completion heap entries: (end_time, seq, running_entry, alloc).
    completions: list[tuple[int, int, tuple[int, int, int], int]] = []

    di = ii = 0
    nd, ni = len(d_jobs), len(i_jobs)
    first_arrival: Optional[int] = None
    last_completion = 0
    next_tick = resort_interval if resort_interval > 0 else None

    def commit_starts(started: list[Started]) -> None:
        nonlocal last_completion
        now = state.clock
        for job, alloc, entry in started:
            end = now + effective_runtime(job)
            heapq.heappush(completions, (end, entry[1], entry, alloc))
            shadow = (
                state.first_shadow.get(job.id)
                if job.queue_class is QueueClass.DEFAULT
                else None
            )
            records.append(
                JobRecord(
                    job_id=job.id,
                    arrival_time=job.arrival_time,
                    start_time=now,
                    end_time=end,
                    requested_nodes=job.requested_nodes,
                    allocated_nodes=alloc,
                    source=job.source,
                    queue_class=job.queue_class,
                    first_shadow=shadow,
                )
            )
            intervals.append(
                AllocationInterval(
                    job_id=job.id,
                    start_time=now,
                    end_time=end,
                    allocated_nodes=alloc,
                    used_nodes=job.requested_nodes,
                    queue_class=job.queue_class,
                )
            )
            if end > last_completion:
                last_completion = end

    while True:
        t: Optional[int] = None
        if di < nd:
            t = d_jobs[di].arrival_time
        if ii < ni and (t is None or i_jobs[ii].arrival_time < t):
            t = i_jobs[ii].arrival_time
        if completions and (t is None or completions[0][0] < t):
            t = completions[0][0]
        if t is None:
            break
        if next_tick is not None:
            while next_tick < t:
                if state.default_queue or state.backfill_queue:
                    state.clock = next_tick
                    commit_starts(schedule_pass(state, machine, policy))
                next_tick += resort_interval
        state.clock = t
        # Completions free nodes before same-instant arrivals are seen.
        while completions and completions[0][0] == t:
            _, _, entry, alloc = heapq.heappop(completions)
            state.free_nodes += alloc
            idx = bisect_left(state.running, entry)
            del state.running[idx]
        while di < nd and d_jobs[di].arrival_time == t:
            if first_arrival is None:
                first_arrival = t
            state.default_queue.append(d_jobs[di])
            di += 1
        while ii < ni and i_jobs[ii].arrival_time == t:
            if first_arrival is None:
                first_arrival = t
            state.backfill_queue.append(i_jobs[ii])
            ii += 1
        commit_starts(schedule_pass(state, machine, policy))

    if first_arrival is None:
        first_arrival = 0
    records.sort(key=lambda r: (r.queue_class.value, r.job_id))
    intervals.sort(key=lambda iv: (iv.start_time, iv.job_id))
    return SimulationResult(
        machine=machine,
        records=records,
        intervals=intervals,
        span=(first_arrival, last_completion),
        unschedulable=tuple(unschedulable),
    )
