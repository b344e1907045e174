import itertools

import pytest

from kserver import (
    InputError,
    OracleGuardExceeded,
    final_work_vector,
    generate_instance,
    initial_work_vector,
    opt_cost,
    opt_cost_to,
    opt_trace,
    oracle_opt,
    trace_violations,
    update_work_vector,
    work_vector_history,
)
from kserver.execution import Move
from kserver.offline import oracle_schedule_costs, oracle_work_vector


def small_instance(seed, n_max=5, k_max=3, len_max=6):
    from kserver.rng import SplitMix64

    stream = SplitMix64(seed)
    n = stream.randint(2, n_max)
    k = stream.randint(1, min(k_max, n))
    rho_len = stream.randint(0, len_max)
    return generate_instance(n, k, rho_len, seed)


class TestOptCost:
    def test_empty(self, m3):
        assert opt_cost(initial_work_vector(m3, (0, 1))) == 0

    def test_single_request(self, m3_instance):
        assert opt_cost(final_work_vector(m3_instance)) == 2

    def test_two_requests(self, m3_instance):
        inst = m3_instance.with_requests((2, 1))
        assert opt_cost(final_work_vector(inst)) == 3
        assert oracle_opt(inst) == 3

    def test_monotone_over_prefixes(self):
        inst = generate_instance(5, 2, 8, seed=77)
        history = work_vector_history(inst)
        costs = [opt_cost(w) for w in history]
        assert costs == sorted(costs)


class TestOptCostTo:
    def test_start_at_zero(self, m3):
        assert opt_cost_to(initial_work_vector(m3, (0, 1)), (0, 1)) == 0

    def test_m3_values(self, m3_instance):
        w = final_work_vector(m3_instance)
        assert opt_cost_to(w, (0, 1)) == 4
        assert opt_cost_to(w, (1, 2)) == 3
        assert oracle_opt(m3_instance, (0, 1)) == 4
        assert oracle_opt(m3_instance, (1, 2)) == 3


class TestOptTrace:
    def test_empty_to_start(self, m3_instance):
        empty = m3_instance.with_requests(())
        trace = opt_trace(empty)
        assert trace.rounds == () and trace.total_cost == 0
        assert opt_trace(empty, (0, 1)).total_cost == 0

    def test_empty_to_other_target_rejected(self, m3_instance):
        with pytest.raises(InputError):
            opt_trace(m3_instance.with_requests(()), (0, 2))

    def test_m3_default_target(self, m3_instance):
        trace = opt_trace(m3_instance)
        assert trace.total_cost == 2
        assert trace.rounds[0].moves == (Move(1, 2, 2),)
        assert trace.rounds[0].config == (0, 2)

    def test_m3_forced_return(self, m3_instance):
        trace = opt_trace(m3_instance, (0, 1))
        assert trace.total_cost == 4
        assert trace.rounds[0].moves == (Move(1, 2, 2), Move(2, 1, 2))
        assert trace.rounds[0].config == (0, 1)

    def test_realizes_work_vector_entry_for_every_target(self):
        for seed in (3, 14, 59):
            inst = small_instance(seed)
            history = work_vector_history(inst)
            final = history[-1]
            if not inst.requests:
                continue
            for target in final.space.configs:
                trace = opt_trace(inst, target)
                assert trace.total_cost == opt_cost_to(final, target)
                assert trace.config_after(len(inst.requests)) == target

    def test_traces_are_x_lazy(self):
        for seed in (8, 21, 34):
            inst = small_instance(seed)
            if not inst.requests:
                continue
            final = final_work_vector(inst)
            for target in final.space.configs:
                trace = opt_trace(inst, target)
                assert trace_violations(trace, inst.metric, x_lazy=True) == []

    def test_deterministic(self, m3_instance):
        inst = m3_instance.with_requests((2, 0, 1, 2))
        assert opt_trace(inst) == opt_trace(inst)

    def test_default_target_is_smallest_rank_argmin(self, uniform3):
        from kserver import Instance

        inst = Instance.build(uniform3, 2, (0, 1), ())
        # every configuration containing a start point has equal cost 0? no:
        # with no requests the unique zero is the start itself
        assert opt_trace(inst).config_after(0) == (0, 1)


class TestOracle:
    def test_empty(self, m3_instance):
        assert oracle_opt(m3_instance.with_requests(())) == 0

    def test_single_request(self, m3_instance):
        # two schedules: serve from 0 (cost 3) or from 1 (cost 2)
        assert oracle_opt(m3_instance) == 2

    def test_with_target(self, m3_instance):
        assert oracle_opt(m3_instance, (0, 1)) == 4

    def test_target_size_checked(self, m3_instance):
        with pytest.raises(InputError):
            oracle_opt(m3_instance, (0,))

    def test_guard_refuses_loudly(self, m3_instance):
        huge = m3_instance.with_requests((0,) * 24)
        with pytest.raises(OracleGuardExceeded):
            oracle_opt(huge)

    def test_schedule_costs_keys_are_position_multisets(self, m3_instance):
        costs = oracle_schedule_costs(m3_instance)
        assert costs == {(1, 2): 3, (0, 2): 2}

    def test_agrees_with_dp_everywhere(self):
        for seed in range(100, 160):
            inst = small_instance(seed)
            w = final_work_vector(inst)
            oracle = oracle_work_vector(inst)
            for cfg, value in w.to_pairs():
                assert value == oracle[cfg], (seed, cfg)


def test_history_shape(m3_instance):
    inst = m3_instance.with_requests((2, 0, 1))
    history = work_vector_history(inst)
    assert len(history) == 4
    assert [w.served_count for w in history] == [0, 1, 2, 3]


def test_k7_uses_assignment_matching():
    # beyond the permutation limit, initial alignment and relocation go
    # through the assignment solver
    inst = generate_instance(9, 7, 3, seed=13)
    history = work_vector_history(inst)
    final = history[-1]
    target = final.space.configs[0]
    trace = opt_trace(inst, target)
    assert trace.total_cost == opt_cost_to(final, target)
    assert trace_violations(trace, inst.metric, x_lazy=True) == []


def test_stacked_positions_handled():
    # both servers driven onto one point, then relocation must split them
    from kserver import Instance, MetricSpace

    line = MetricSpace.from_matrix([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    inst = Instance.build(line, 2, (0, 2), (1,))
    costs = oracle_schedule_costs(inst)
    assert (1, 2) in costs and (0, 1) in costs
    for target in itertools.combinations(range(3), 2):
        assert oracle_opt(inst, target) == opt_cost_to(final_work_vector(inst), target)
