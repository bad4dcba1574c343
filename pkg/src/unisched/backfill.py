"""EASY backfilling: head-job reservation and no-delay candidate selection.

Exactly one reservation is held, for the blocked queue head.  Running-job
end times here are always walltime-based (start + requested walltime), so
early completions can only make the head start sooner, never later.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .model import Job, Machine, QueueClass, min_alloc_round


class UnschedulableJobError(ValueError):
    """The job's allocation exceeds the machine; it can never run."""


@dataclass(frozen=True, slots=True)
class Reservation:
    """Start guarantee for the blocked head job.

    ``shadow_time`` is the earliest instant at which enough nodes are
    guaranteed free; ``extra_nodes`` are the nodes free at that instant
    beyond the head's allocation.  Backfill jobs running past the shadow
    time must fit within the extras.
    """

    job_id: int
    shadow_time: int
    extra_nodes: int


def compute_reservation(
    head: Job,
    running: Iterable[tuple[int, int]],
    free_now: int,
    machine: Machine,
    now: int,
) -> Reservation:
    """Reservation for a blocked head job.

    ``running`` yields (walltime_end, allocated_nodes) pairs; they need not
    be pre-sorted.  Precondition: the head does not fit in ``free_now``.
    """
    if head.queue_class is QueueClass.DEFAULT:
        alloc = min_alloc_round(head.requested_nodes, machine)
    else:
        alloc = head.requested_nodes
    if alloc > machine.total_nodes:
        raise UnschedulableJobError(
            f"job {head.id} needs {alloc} nodes on a {machine.total_nodes}-node machine"
        )
    if free_now >= alloc:
        raise ValueError("head already fits; no reservation exists")

    avail = free_now
    ordered = sorted(running)
    i = 0
    n = len(ordered)
    while i < n:
        end = ordered[i][0]
        # All jobs ending at the same instant free their nodes together.
        while i < n and ordered[i][0] == end:
            avail += ordered[i][1]
            i += 1
        if avail >= alloc:
            return Reservation(job_id=head.id, shadow_time=end, extra_nodes=avail - alloc)
    raise ValueError("running jobs never free enough nodes for the head")


def backfill_pass(
    candidates: Sequence[Job],
    reservation: Optional[Reservation],
    free_now: int,
    now: int,
    machine: Machine,
) -> list[Job]:
    """Greedily select backfill jobs that cannot delay the head.

    Candidates are scanned in order; a job is selected if it fits the free
    nodes and either finishes by the shadow time or fits within the extra
    nodes.  ``reservation=None`` means no head is waiting, so the no-delay
    condition is vacuous.  Free nodes (and extras, for jobs running past
    the shadow time) are decremented as selections commit.
    """
    selected: list[Job] = []
    free = free_now
    if reservation is None:
        shadow = None
        extra = 0
    else:
        shadow = reservation.shadow_time
        extra = reservation.extra_nodes
    for job in candidates:
        if free <= 0:
            break
        if job.queue_class is QueueClass.DEFAULT:
            alloc = min_alloc_round(job.requested_nodes, machine)
        else:
            alloc = job.requested_nodes
        if alloc > free:
            continue
        if shadow is None or now + job.requested_walltime <= shadow:
            free -= alloc
            selected.append(job)
        elif alloc <= extra:
            free -= alloc
            extra -= alloc
            selected.append(job)
    return selected
