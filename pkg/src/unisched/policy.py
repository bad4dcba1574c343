"""Queue-ordering policies: FCFS and the WFP utility score.

WFP scores a waiting job as (wait^2 / walltime^3) * (size / machine size),
favoring long-waiting, large, short-walltime jobs.  Scores are recomputed
from scratch at every scheduling pass.
"""
from __future__ import annotations

from enum import Enum
from typing import Sequence

from .model import Job, Machine


class PolicyKind(str, Enum):
    FCFS = "fcfs"
    WFP = "wfp"


def wfp_score(job: Job, now: int, machine: Machine) -> float:
    """Utility score of a waiting job at time ``now``.

    Zero wait yields a zero score.
    """
    wait = now - job.arrival_time
    if wait < 0:
        raise ValueError("now must be >= job arrival time")
    t_supplied = job.requested_walltime
    return (wait * wait) / (t_supplied ** 3) * (job.requested_nodes / machine.total_nodes)


def fcfs_key(job: Job) -> tuple[int, int]:
    return (job.arrival_time, job.id)


def order_queue(
    queue: Sequence[Job],
    policy: PolicyKind,
    now: int = 0,
    machine: Machine | None = None,
) -> list[Job]:
    """Deterministic policy ordering of a wait queue.

    FCFS sorts ascending by (arrival, id).  WFP sorts by descending score
    with ties broken by (arrival, id).
    """
    if policy is PolicyKind.FCFS:
        return sorted(queue, key=fcfs_key)
    if machine is None:
        raise ValueError("WFP ordering requires a machine")
    return sorted(
        queue,
        key=lambda j: (-wfp_score(j, now, machine), j.arrival_time, j.id),
    )
