import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kserver import (
    InputError,
    Instance,
    configuration_distance,
    d_equivalence,
    final_work_vector,
    generate_instance,
    initial_work_vector,
    run_wfa,
    trace_violations,
    update_work_vector,
    wfa_decide,
    work_vector_to_json,
)
from kserver.anchor import compute_anchor
from kserver.offline import oracle_work_vector


def small_instance(seed, n_max=5, k_max=3, len_max=6):
    from kserver.rng import SplitMix64

    stream = SplitMix64(seed)
    n = stream.randint(2, n_max)
    k = stream.randint(1, min(k_max, n))
    rho_len = stream.randint(0, len_max)
    return generate_instance(n, k, rho_len, seed)


class TestInitialVector:
    def test_m3_values(self, m3):
        w = initial_work_vector(m3, (0, 1))
        assert w.value((0, 1)) == 0
        assert w.value((0, 2)) == 2
        assert w.value((1, 2)) == 3
        assert w.served_count == 0

    def test_equals_matching_distance_everywhere(self):
        from kserver import random_metric

        metric = random_metric(6, seed=17)
        w = initial_work_vector(metric, (0, 2, 4))
        for cfg in itertools.combinations(range(6), 3):
            assert w.value(cfg) == configuration_distance((0, 2, 4), cfg, metric)


class TestUpdate:
    def test_m3_request_2(self, m3, m3_instance):
        w = update_work_vector(initial_work_vector(m3, (0, 1)), 2)
        assert w.value((0, 2)) == 2
        assert w.value((1, 2)) == 3
        assert w.value((0, 1)) == 4
        # full-vector agreement with the schedule-enumeration oracle
        oracle = oracle_work_vector(m3_instance)
        for cfg, value in w.to_pairs():
            assert value == oracle[cfg]

    def test_m3_request_already_in_start(self, m3, m3_instance):
        w0 = initial_work_vector(m3, (0, 1))
        w = update_work_vector(w0, 0)
        assert w.value((1, 2)) == 3 == w0.value((1, 2))
        oracle = oracle_work_vector(m3_instance.with_requests((0,)))
        for cfg, value in w.to_pairs():
            assert value == oracle[cfg]

    def test_covered_request_changes_nothing_for_members(self, m3):
        w0 = initial_work_vector(m3, (0, 1))
        w1 = update_work_vector(w0, 1)
        for cfg, value in w1.to_pairs():
            if 1 in cfg:
                assert value == w0.value(cfg)

    def test_input_vector_not_modified(self, m3):
        w0 = initial_work_vector(m3, (0, 1))
        before = w0.values.copy()
        update_work_vector(w0, 2)
        assert np.array_equal(w0.values, before)
        with pytest.raises(ValueError):
            w0.values[0] = 99  # read-only storage


class TestDecide:
    def test_covered_request_is_empty_move(self, m3):
        w = initial_work_vector(m3, (0, 1))
        decision = wfa_decide(w, (0, 1), 0)
        assert (decision.mover, decision.cost, decision.config) == (0, 0, (0, 1))

    def test_m3_moves_closer_server(self, m3):
        w = initial_work_vector(m3, (0, 1))
        decision = wfa_decide(w, (0, 1), 2)
        assert (decision.mover, decision.cost, decision.config) == (1, 2, (0, 2))

    def test_tie_breaks_to_smallest_position(self, uniform3):
        w = initial_work_vector(uniform3, (0, 1))
        decision = wfa_decide(w, (0, 1), 2)
        assert decision.mover == 0
        assert decision.config == (1, 2)

    def test_errors(self, m3):
        w = initial_work_vector(m3, (0, 1))
        with pytest.raises(InputError):
            wfa_decide(w, (0, 5), 2)
        with pytest.raises(InputError):
            wfa_decide(w, (0, 1), 9)


class TestRunWfa:
    def test_empty_sequence(self, m3_instance):
        trace = run_wfa(m3_instance.with_requests(()))
        assert trace.total_cost == 0
        assert trace.rounds == ()
        assert trace.config_after(0) == (0, 1)

    def test_single_request(self, m3_instance):
        trace = run_wfa(m3_instance)
        assert trace.total_cost == 2
        assert trace.rounds[-1].config == (0, 2)

    def test_second_request_covered(self, m3_instance):
        trace = run_wfa(m3_instance.with_requests((2, 0)))
        assert trace.total_cost == 2
        assert trace.rounds[1].moves == ()

    def test_traces_are_lazy(self):
        for seed in range(1, 15):
            inst = small_instance(seed)
            trace = run_wfa(inst)
            assert trace_violations(trace, inst.metric) == []


class TestProperties:
    def test_monotone_and_lipschitz_per_round(self):
        inst = generate_instance(5, 3, 6, seed=23)
        space_configs = None
        w = initial_work_vector(inst.metric, inst.initial)
        assert w.value(inst.initial) == 0
        for request in inst.requests:
            new = update_work_vector(w, request)
            assert np.all(new.values >= w.values)
            if space_configs is None:
                space_configs = new.space.configs
            for x, y in itertools.combinations(space_configs, 2):
                bound = configuration_distance(x, y, inst.metric)
                assert abs(new.value(x) - new.value(y)) <= bound
            w = new
        assert np.all(w.values >= 0)

    def test_membership_stability(self):
        for seed in range(30, 40):
            inst = small_instance(seed)
            w = initial_work_vector(inst.metric, inst.initial)
            for request in inst.requests:
                new = update_work_vector(w, request)
                for cfg, value in new.to_pairs():
                    if request in cfg:
                        assert value == w.value(cfg)
                w = new

    def test_oracle_equivalence_small(self):
        for seed in range(50, 80):
            inst = small_instance(seed)
            w = final_work_vector(inst)
            oracle = oracle_work_vector(inst)
            for cfg, value in w.to_pairs():
                assert value == oracle[cfg], (seed, cfg)

    def test_translation_invariance_of_decisions(self, m3):
        w = initial_work_vector(m3, (0, 1))
        for offset in (1, 1000, 10**9):
            shifted = w.shifted(offset)
            for cfg in w.space.configs:
                for request in range(3):
                    assert wfa_decide(w, cfg, request) == wfa_decide(shifted, cfg, request)

    def test_d_equivalence_preserved_by_update(self, m3):
        w = initial_work_vector(m3, (0, 1))
        shifted = w.shifted(7)
        for request in (2, 0, 1, 2):
            w = update_work_vector(w, request)
            shifted = update_work_vector(shifted, request)
            assert d_equivalence(shifted, w) == 7

    def test_oblivious_across_histories(self, m3_instance):
        # two different served histories with offset-equivalent vectors must
        # yield identical decisions for every configuration and request
        anchor = compute_anchor(m3_instance, alpha=3, beta=0)
        anchored = m3_instance.with_requests(m3_instance.requests + anchor.requests)
        w_long = final_work_vector(anchored)
        w_short = initial_work_vector(m3_instance.metric, m3_instance.initial)
        assert d_equivalence(w_long, w_short) is not None
        for cfg in w_long.space.configs:
            for request in range(3):
                assert wfa_decide(w_long, cfg, request) == wfa_decide(w_short, cfg, request)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**62))
def test_update_monotone_random(seed):
    inst = small_instance(seed, n_max=5, k_max=3, len_max=4)
    w = initial_work_vector(inst.metric, inst.initial)
    for request in inst.requests:
        new = update_work_vector(w, request)
        assert np.all(new.values >= w.values)
        w = new


class TestDEquivalence:
    def test_reflexive(self, m3):
        w = initial_work_vector(m3, (0, 1))
        assert d_equivalence(w, w) == 0

    def test_shift_detected(self, m3):
        w = initial_work_vector(m3, (0, 1))
        assert d_equivalence(w.shifted(5), w) == 5

    def test_not_equivalent(self, m3):
        w0 = initial_work_vector(m3, (0, 1))
        w1 = update_work_vector(w0, 2)
        assert d_equivalence(w1, w0) is None

    def test_mismatched_spaces_rejected(self, m3, uniform3):
        with pytest.raises(InputError):
            d_equivalence(initial_work_vector(m3, (0, 1)), initial_work_vector(uniform3, (0, 1)))

    def test_anchored_offset_is_value_at_start(self, m3_instance):
        anchor = compute_anchor(m3_instance, alpha=3, beta=0)
        anchored = m3_instance.with_requests(m3_instance.requests + anchor.requests)
        w_anchored = final_work_vector(anchored)
        w_empty = initial_work_vector(m3_instance.metric, m3_instance.initial)
        assert d_equivalence(w_anchored, w_empty) == w_anchored.value(m3_instance.initial)


def test_work_vector_json_rank_order(m3):
    w = initial_work_vector(m3, (0, 1))
    assert work_vector_to_json(w) == [[[0, 1], 0], [[0, 2], 2], [[1, 2], 3]]
