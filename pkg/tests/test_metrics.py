import pytest

from unisched import (
    AllocationInterval,
    Job,
    JobRecord,
    Machine,
    QueueClass,
    SimulationResult,
    Source,
    UtilizationVariant,
    Workload,
    rescued_resource,
    simulate,
    utilization_series,
    wait_stats,
)
from unisched.metrics import DAY


def record(job_id, arrival, start, end, nodes, alloc=None,
           source=Source.CAPABILITY, queue_class=QueueClass.DEFAULT):
    return JobRecord(
        job_id=job_id, arrival_time=arrival, start_time=start, end_time=end,
        requested_nodes=nodes, allocated_nodes=alloc if alloc is not None else nodes,
        source=source, queue_class=queue_class,
    )


def interval(job_id, start, end, alloc, used=None, queue_class=QueueClass.DEFAULT):
    return AllocationInterval(
        job_id=job_id, start_time=start, end_time=end, allocated_nodes=alloc,
        used_nodes=used if used is not None else alloc, queue_class=queue_class,
    )


def result_of(machine, records, intervals, span):
    return SimulationResult(machine=machine, records=records,
                            intervals=intervals, span=span)


class TestUtilization:
    def test_idle_bucket_is_zero(self):
        r = result_of(
            Machine(10),
            [record(1, 0, 0, 10, 2)],
            [interval(1, 0, 10, 2)],
            span=(0, 3 * DAY),
        )
        series = utilization_series(r, bucket=DAY)
        assert series.values[1] == 0.0
        assert series.values[2] == 0.0

    def test_single_bucket_fraction(self):
        # 128 of 4,360 nodes for exactly one bucket: 128/4360.
        r = result_of(
            Machine(4360),
            [record(1, 0, 0, DAY, 128)],
            [interval(1, 0, DAY, 128)],
            span=(0, DAY),
        )
        series = utilization_series(r, bucket=DAY)
        assert series.values[0] == pytest.approx(128 / 4360)

    def test_allocated_vs_effective(self):
        r = result_of(
            Machine(4360, min_alloc=128),
            [record(1, 0, 0, DAY, 1, alloc=128)],
            [interval(1, 0, DAY, 128, used=1)],
            span=(0, DAY),
        )
        alloc = utilization_series(r, DAY, UtilizationVariant.ALLOCATED)
        eff = utilization_series(r, DAY, UtilizationVariant.EFFECTIVE)
        assert alloc.values[0] == pytest.approx(128 / 4360)
        assert eff.values[0] == pytest.approx(1 / 4360)

    def test_allocated_dominates_effective(self):
        w = Workload(jobs=tuple(
            Job(id=i, arrival_time=i * 10, requested_nodes=1 + i % 5,
                requested_walltime=500, actual_runtime=300)
            for i in range(30)
        ))
        r = simulate(Machine(64, min_alloc=4), w)
        alloc = utilization_series(r, bucket=600, variant=UtilizationVariant.ALLOCATED)
        eff = utilization_series(r, bucket=600, variant=UtilizationVariant.EFFECTIVE)
        assert all(a >= e for a, e in zip(alloc.values, eff.values))

    def test_node_seconds_conserved_exactly(self):
        w = Workload(jobs=tuple(
            Job(id=i, arrival_time=i * 7, requested_nodes=1 + i % 3,
                requested_walltime=95, actual_runtime=60 + i % 40)
            for i in range(50)
        ))
        r = simulate(Machine(8), w)
        series = utilization_series(r, bucket=100)
        expected = sum(
            iv.allocated_nodes * (iv.end_time - iv.start_time) for iv in r.intervals
        )
        assert sum(series.node_seconds) == expected

    def test_empty_result_rejected(self):
        r = result_of(Machine(10), [], [], span=(0, 0))
        with pytest.raises(ValueError):
            utilization_series(r)


class TestWaitStats:
    def test_zero_wait(self):
        r = result_of(Machine(10), [record(1, 5, 5, 10, 1)], [], span=(0, 10))
        (s,) = wait_stats(r)
        assert s.mean_wait == 0.0

    def test_mean_of_two(self):
        r = result_of(
            Machine(10),
            [record(1, 0, 90, 100, 1), record(2, 0, 0, 10, 1)],
            [],
            span=(0, 100),
        )
        (s,) = wait_stats(r)
        assert s.mean_wait == pytest.approx(45.0)
        assert s.count == 2

    def test_single_job_group_flagged_degenerate(self):
        r = result_of(Machine(10), [record(1, 0, 7, 10, 1)], [], span=(0, 10))
        (s,) = wait_stats(r)
        assert s.degenerate
        assert s.stderr == 0.0
        assert s.ci95_half_width == 0.0

    def test_grouping_by_source_and_size(self):
        r = result_of(
            Machine(10),
            [
                record(1, 0, 0, 10, 1, source=Source.CAPABILITY),
                record(2, 0, 4, 10, 1, source=Source.CAPACITY),
                record(3, 0, 8, 10, 5, source=Source.CAPACITY),
            ],
            [],
            span=(0, 10),
        )
        stats = wait_stats(r, by_source=True, size_bins=((1, 2), (3, None)))
        keys = {s.key for s in stats}
        assert keys == {("capability", "1-2"), ("capacity", "1-2"), ("capacity", ">=3")}

    def test_ci_is_1_96_stderr(self):
        r = result_of(
            Machine(10),
            [record(i, 0, w, 100, 1) for i, w in enumerate([0, 10, 50, 90])],
            [],
            span=(0, 100),
        )
        (s,) = wait_stats(r)
        assert s.ci95_half_width == pytest.approx(1.96 * s.stderr)


class TestRescuedResource:
    def test_constructed_schedule(self):
        # Machine of 10 nodes over a 100 s bucket: capability jobs occupy
        # 800 node-s, injected 150 node-s; waste 200, rescued 75%.
        r = result_of(
            Machine(10),
            [
                record(1, 0, 0, 100, 8),
                record(2, 0, 0, 50, 3, source=Source.CAPACITY,
                       queue_class=QueueClass.BACKFILL),
            ],
            [
                interval(1, 0, 100, 8),
                interval(2, 0, 50, 3, queue_class=QueueClass.BACKFILL),
            ],
            span=(0, 100),
        )
        (v,) = rescued_resource(r, bucket=100)
        assert v == pytest.approx(75.0)

    def test_bucket_without_injected_jobs_is_zero(self):
        r = result_of(
            Machine(10),
            [
                record(1, 0, 0, 100, 5),
                record(2, 100, 100, 150, 1, source=Source.CAPACITY,
                       queue_class=QueueClass.BACKFILL),
            ],
            [
                interval(1, 0, 100, 5),
                interval(2, 100, 150, 1, queue_class=QueueClass.BACKFILL),
            ],
            span=(0, 200),
        )
        values = rescued_resource(r, bucket=100)
        assert values[0] == 0.0

    def test_fully_packed_bucket_reports_null(self):
        r = result_of(
            Machine(10),
            [
                record(1, 0, 0, 100, 10),
                record(2, 100, 100, 150, 1, source=Source.CAPACITY,
                       queue_class=QueueClass.BACKFILL),
            ],
            [
                interval(1, 0, 100, 10),
                interval(2, 100, 150, 1, queue_class=QueueClass.BACKFILL),
            ],
            span=(0, 100),
        )
        values = rescued_resource(r, bucket=100)
        assert values[0] is None

    def test_requires_injection_run(self):
        r = result_of(Machine(10), [record(1, 0, 0, 10, 1)], [], span=(0, 10))
        with pytest.raises(ValueError):
            rescued_resource(r)

    def test_bounded_between_0_and_100(self):
        cap = Workload(jobs=tuple(
            Job(id=i, arrival_time=i * 50, requested_nodes=6,
                requested_walltime=120, actual_runtime=100)
            for i in range(20)
        ))
        inj = Workload(jobs=tuple(
            Job(id=i, arrival_time=i * 13, requested_nodes=2,
                requested_walltime=40, actual_runtime=30,
                source=Source.CAPACITY)
            for i in range(60)
        ))
        r = simulate(Machine(8), cap, inj)
        for v in rescued_resource(r, bucket=200):
            if v is not None:
                assert 0.0 <= v <= 100.0
