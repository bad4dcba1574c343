import pytest
from hypothesis import given, strategies as st

from unisched import (
    AllocationInterval,
    Job,
    Machine,
    SimulationResult,
    effective_runtime,
    min_alloc_round,
)


def make_job(**kw):
    base = dict(id=1, arrival_time=0, requested_nodes=1,
                requested_walltime=100, actual_runtime=50)
    base.update(kw)
    return Job(**base)


class TestMinAllocRound:
    def test_rounds_small_request_up(self):
        assert min_alloc_round(1, Machine(4360, min_alloc=128)) == 128

    def test_at_threshold(self):
        assert min_alloc_round(128, Machine(4360, min_alloc=128)) == 128

    def test_identity_above_threshold(self):
        assert min_alloc_round(300, Machine(4360, min_alloc=128)) == 300

    def test_rejects_zero_request(self):
        with pytest.raises(ValueError):
            min_alloc_round(0, Machine(10))

    @given(st.integers(1, 10_000), st.integers(0, 512))
    def test_idempotent(self, nodes, min_alloc):
        m = Machine(20_000, min_alloc=min_alloc)
        once = min_alloc_round(nodes, m)
        assert min_alloc_round(once, m) == once

    @given(st.integers(1, 10_000), st.integers(1, 10_000), st.integers(0, 512))
    def test_monotone(self, a, b, min_alloc):
        m = Machine(20_000, min_alloc=min_alloc)
        lo, hi = sorted((a, b))
        assert min_alloc_round(lo, m) <= min_alloc_round(hi, m)


class TestEffectiveRuntime:
    def test_short_job_unaffected(self):
        assert effective_runtime(make_job(actual_runtime=100, requested_walltime=3600)) == 100

    def test_killed_at_walltime(self):
        assert effective_runtime(make_job(actual_runtime=4000, requested_walltime=3600)) == 3600

    def test_boundary(self):
        assert effective_runtime(make_job(actual_runtime=3600, requested_walltime=3600)) == 3600


class TestValidation:
    @pytest.mark.parametrize(
        "field,value",
        [
            ("requested_nodes", 0),
            ("requested_walltime", 0),
            ("actual_runtime", -1),
            ("arrival_time", -5),
        ],
    )
    def test_bad_job_fields(self, field, value):
        with pytest.raises(ValueError):
            make_job(**{field: value})

    def test_machine_min_alloc_bounds(self):
        with pytest.raises(ValueError):
            Machine(total_nodes=100, min_alloc=128)
        with pytest.raises(ValueError):
            Machine(total_nodes=10, min_alloc=-1)

    def test_interval_ordering(self):
        with pytest.raises(ValueError):
            AllocationInterval(1, 10, 10, 4, 4)
        with pytest.raises(ValueError):
            AllocationInterval(1, 0, 10, 4, 8)


def test_max_concurrent_allocation_sweep():
    ivs = [
        AllocationInterval(0, 0, 10, 4, 4),
        AllocationInterval(1, 5, 15, 3, 3),
        AllocationInterval(2, 10, 20, 5, 5),
    ]
    result = SimulationResult(machine=Machine(10), records=[], intervals=ivs, span=(0, 20))
    assert result.max_concurrent_allocation() == 8
