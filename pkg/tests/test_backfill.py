import pytest

from unisched import Job, Machine, QueueClass, backfill_pass, compute_reservation
from unisched.backfill import Reservation, UnschedulableJobError


def job(i, arrival=0, nodes=1, walltime=100, runtime=50, queue_class=QueueClass.DEFAULT):
    return Job(id=i, arrival_time=arrival, requested_nodes=nodes,
               requested_walltime=walltime, actual_runtime=runtime,
               queue_class=queue_class)


class TestComputeReservation:
    def test_hand_timeline(self):
        # free 2 -> 4 (t=50) -> 10 (t=100); head needs 8.
        r = compute_reservation(
            job(9, nodes=8), running=[(50, 2), (100, 6)], free_now=2,
            machine=Machine(10), now=0,
        )
        assert (r.shadow_time, r.extra_nodes) == (100, 2)

    def test_head_already_fits_is_a_precondition_violation(self):
        with pytest.raises(ValueError):
            compute_reservation(job(9, nodes=2), [(50, 8)], free_now=2,
                                machine=Machine(10), now=0)

    def test_full_machine_head(self):
        r = compute_reservation(
            job(9, nodes=10), running=[(70, 10)], free_now=0,
            machine=Machine(10), now=0,
        )
        assert (r.shadow_time, r.extra_nodes) == (70, 0)

    def test_simultaneous_ends_count_together(self):
        r = compute_reservation(
            job(9, nodes=8), running=[(50, 4), (50, 4)], free_now=0,
            machine=Machine(10), now=0,
        )
        assert (r.shadow_time, r.extra_nodes) == (50, 0)

    def test_oversized_head_rejected(self):
        with pytest.raises(UnschedulableJobError):
            compute_reservation(job(9, nodes=11), [(50, 10)], free_now=0,
                                machine=Machine(10), now=0)

    def test_min_alloc_rounding_applies_to_default_head(self):
        # A 1-node default-class head needs a 4-node allocation.
        r = compute_reservation(
            job(9, nodes=1), running=[(30, 2), (60, 6)], free_now=2,
            machine=Machine(10, min_alloc=4), now=0,
        )
        assert r.shadow_time == 30


class TestBackfillPass:
    MACHINE = Machine(10)
    RESERVATION = Reservation(job_id=9, shadow_time=100, extra_nodes=2)

    def test_selected_within_extras(self):
        cand = [job(1, nodes=2, walltime=150)]
        assert backfill_pass(cand, self.RESERVATION, free_now=2, now=0,
                             machine=self.MACHINE) == cand

    def test_selected_when_ending_before_shadow(self):
        cand = [job(1, nodes=2, walltime=90)]
        assert backfill_pass(cand, self.RESERVATION, free_now=2, now=0,
                             machine=self.MACHINE) == cand

    def test_not_selected_when_it_does_not_fit_now(self):
        cand = [job(1, nodes=4, walltime=10)]
        assert backfill_pass(cand, self.RESERVATION, free_now=2, now=0,
                             machine=self.MACHINE) == []

    def test_extras_are_consumed(self):
        cand = [job(1, nodes=2, walltime=150), job(2, nodes=2, walltime=150)]
        out = backfill_pass(cand, self.RESERVATION, free_now=6, now=0,
                            machine=self.MACHINE)
        assert [j.id for j in out] == [1]

    def test_short_jobs_do_not_consume_extras(self):
        cand = [job(1, nodes=2, walltime=90), job(2, nodes=2, walltime=150)]
        out = backfill_pass(cand, self.RESERVATION, free_now=6, now=0,
                            machine=self.MACHINE)
        assert [j.id for j in out] == [1, 2]

    def test_free_nodes_never_go_negative(self):
        cand = [job(i, nodes=3, walltime=10) for i in range(5)]
        out = backfill_pass(cand, self.RESERVATION, free_now=7, now=0,
                            machine=self.MACHINE)
        assert sum(j.requested_nodes for j in out) <= 7

    def test_no_reservation_means_no_delay_condition(self):
        cand = [job(1, nodes=5, walltime=10_000), job(2, nodes=6, walltime=10_000)]
        out = backfill_pass(cand, None, free_now=10, now=0, machine=self.MACHINE)
        assert [j.id for j in out] == [1]

    def test_backfill_class_skips_min_alloc_rounding(self):
        machine = Machine(10, min_alloc=4)
        cand = [
            job(1, nodes=1, walltime=90, queue_class=QueueClass.BACKFILL),
            job(2, nodes=1, walltime=90),  # default class: rounds to 4
        ]
        out = backfill_pass(cand, self.RESERVATION, free_now=3, now=0, machine=machine)
        assert [j.id for j in out] == [1]
