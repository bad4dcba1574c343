"""Trace-driven batch-scheduling simulator for unified capability/capacity
cluster studies: workload fusion on a resizable unified machine, and
capacity-job injection into a capability machine's backfill queue."""

from .backfill import Reservation, backfill_pass, compute_reservation
from .engine import SchedulerState, downsize, schedule_pass, simulate
from .metrics import (
    UtilizationVariant,
    rescued_resource,
    utilization_series,
    wait_stats,
)
from .model import (
    AllocationInterval,
    Job,
    JobRecord,
    Machine,
    QueueClass,
    SimulationResult,
    Source,
    effective_runtime,
    min_alloc_round,
)
from .policy import PolicyKind, order_queue, wfp_score
from .workload import (
    SynthSpec,
    Workload,
    characterize,
    filter_workload,
    merge_workloads,
    parse_trace,
    synthesize,
)

__all__ = [
    "AllocationInterval",
    "Job",
    "JobRecord",
    "Machine",
    "PolicyKind",
    "QueueClass",
    "Reservation",
    "SchedulerState",
    "SimulationResult",
    "Source",
    "SynthSpec",
    "UtilizationVariant",
    "Workload",
    "backfill_pass",
    "characterize",
    "compute_reservation",
    "downsize",
    "effective_runtime",
    "filter_workload",
    "merge_workloads",
    "min_alloc_round",
    "order_queue",
    "parse_trace",
    "rescued_resource",
    "schedule_pass",
    "simulate",
    "synthesize",
    "utilization_series",
    "wait_stats",
    "wfp_score",
]
