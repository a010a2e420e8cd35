from collections import Counter

import pytest

from netsim.election import (ACTION, FEEDBACK, INFO, ElectionMessage, ElectionProtocol,
                             ProtocolViolationError, run_election, write_trace)
from netsim.engine import DelayModel, Engine, UnknownSenderError
from netsim.fragments import FragmentId as F
from netsim.fragments import InvalidGrowthFactorError
from netsim.oracle import message_bound, oracle_run
from netsim.topology import Topology, generate

from conftest import complete_topology, corpus, path_topology, random_corpus


def _drain(engine, protocol):
    while engine.step(protocol) is not None:
        pass


def _phase_keys(phases):
    return Counter(p.key() for p in phases)


class TestHandExamples:
    def test_two_nodes(self):
        result = run_election(path_topology([1, 2]))
        assert result.leader == 2
        assert [e.key() for e in result.merges] == [(F(1, 1), F(1, 2))]
        assert result.transmissions == 6
        assert result.transmissions_by_kind == {
            'FEEDBACK': 1, 'INFO': 1, 'INFO_FINAL': 2, 'INFO_INIT': 2}
        assert result.init_time == 1.0
        assert result.decision_time == pytest.approx(2.0)
        assert result.time_excl_init == pytest.approx(1.0)
        assert result.completion_time == pytest.approx(3.0)

    def test_two_nodes_phase_accounting(self):
        result = run_election(path_topology([1, 2]))
        first, last = result.work_phases
        assert (first.candidate, first.outcome, first.decision_time) == (1, 'join', 1.0)
        assert (first.feedback, first.action, first.info) == (0, 0, 1)
        assert (last.candidate, last.outcome, last.new_size) == (2, 'leader', 2)
        assert (last.feedback, last.action, last.info) == (1, 0, 0)

    def test_triangle(self):
        result = run_election(complete_topology(3))
        assert result.leader == 3
        assert set(result.merge_multiset()) == {(F(1, 1), F(1, 3)), (F(1, 2), F(1, 3))}
        assert result.decision_time == 4.0

    def test_triangle_single_local_minimum_after_init(self):
        result = run_election(complete_topology(3))
        at_one = [p for p in result.work_phases if p.decision_time == 1.0]
        assert [p.candidate for p in at_one] == [1]

    @pytest.mark.parametrize('n', [3, 4, 5, 6, 8])
    def test_complete_graph(self, n):
        result = run_election(complete_topology(n))
        assert result.leader == n
        assert result.post_init_transmissions == 3 * n - 2
        assert result.all_know_leader

    @pytest.mark.parametrize('n', [5, 6, 8])
    def test_complete_graph_message_bound(self, n):
        result = run_election(complete_topology(n))
        assert result.post_init_transmissions <= message_bound(3.0, n) + n

    def test_sorted_string_of_eight(self):
        result = run_election(path_topology(list(range(1, 9))))
        assert result.leader == 4
        assert result.post_init_transmissions == 35
        assert result.post_init_transmissions <= message_bound(3.0, 8) + 8
        assert result.work_messages == 27

        phases = {p.entry_id: (p.feedback, p.action, p.info) for p in result.work_phases}
        assert phases[F(1, 1)] == (0, 0, 1)
        assert phases[F(1, 2)] == (1, 0, 2)
        assert phases[F(1, 3)] == (2, 0, 3)
        assert phases[F(1, 4)] == (3, 0, 4)
        for i in range(5, 9):
            assert phases[F(1, i)] == (0, 0, 1)
        assert phases[F(4, 4)] == (7, 0, 0)

        outcomes = {p.entry_id: p.outcome for p in result.work_phases}
        assert outcomes[F(1, 4)] == 'stay'
        assert outcomes[F(4, 4)] == 'leader'

    def test_single_node(self, single):
        result = run_election(single)
        assert result.leader == 1
        assert result.merges == []
        assert result.transmissions == 2
        assert result.time_excl_init == 0.0


class TestManualState:
    def test_action_travels_two_hops(self):
        # fragment (3,1) = {1, 2, 3} rooted at 1; node 4 is fragment (5,4)
        t = path_topology([1, 2, 3, 4])
        proto = ElectionProtocol(3.0)
        engine = Engine(t, keep_log=True)
        proto.attach(engine)
        m, w = F(3, 1), F(5, 4)
        s = proto.states
        for node in t.nodes:
            s[node].awake = True
            s[node].my_fragment = m
        s[4].my_fragment = w
        s[2].parent, s[3].parent = 1, 2
        s[1].known_id, s[1].known_parent = {2: m}, {2: 1}
        s[2].known_id, s[2].known_parent = {1: m, 3: m}, {1: None, 3: 2}
        s[3].known_id, s[3].known_parent = {2: m, 4: w}, {2: 1}
        s[4].known_id = {3: m}
        for node, child in ((1, 2), (2, 3), (3, 3)):
            s[node].fired_cycle = m
            s[node].return_child = child
        s[1].subtree_count = 3
        s[1].best_external = w

        proto.elect_candidate_decide(1, 0.0)
        _drain(engine, proto)

        assert proto.counts[ACTION] == 2
        infos = [d for d in engine.deliveries if d[4] == INFO]
        assert infos[0][2] == 3
        assert proto.merges[0].key() == (m, w)
        assert proto.leader == 4
        assert s[3].parent == 4 and s[2].parent == 3 and s[1].parent == 2
        assert proto.is_terminated()

    def test_feedback_fold_picks_largest_report(self):
        t = Topology.from_edges([1, 2, 3, 4, 5], [(1, 2), (1, 3), (1, 4), (1, 5)])
        proto = ElectionProtocol(3.0)
        engine = Engine(t)
        proto.attach(engine)
        mine = F(2, 5)
        st = proto.states[1]
        st.awake = True
        st.my_fragment, st.parent = mine, 5
        st.known_id = {2: mine, 3: mine, 4: F(2, 9), 5: mine}
        st.known_parent = {2: 1, 3: 1, 4: None, 5: None}
        st.child_feedback = {
            2: ElectionMessage.feedback(1, mine, 1, F(5, 4)),
            3: ElectionMessage.feedback(1, mine, 1, F(5, 6)),
        }
        proto.elect_on_feedback_trigger(1, 0.0)
        assert st.best_external == F(5, 6)
        assert st.return_child == 3
        assert st.subtree_count == 3
        assert st.gateway == 4
        assert proto.counts[FEEDBACK] == 1

    def test_waits_for_missing_child(self):
        t = path_topology([1, 2, 3])
        proto = ElectionProtocol(3.0)
        engine = Engine(t)
        proto.attach(engine)
        mine = F(2, 3)
        st = proto.states[2]
        st.awake = True
        st.my_fragment, st.parent = mine, 3
        st.known_id = {1: mine, 3: mine}
        st.known_parent = {1: 2, 3: None}
        proto.elect_on_feedback_trigger(2, 0.0)
        assert st.fired_cycle is None
        assert engine.pending == 0

    def test_action_without_return_path(self):
        t = path_topology([1, 2])
        proto = ElectionProtocol(3.0)
        proto.attach(Engine(t))
        with pytest.raises(ProtocolViolationError):
            proto.elect_on_action(1, 2, ElectionMessage.action(1, F(1, 2), F(1, 1)), 1.0)

    def test_feedback_needs_positive_count(self):
        with pytest.raises(ProtocolViolationError):
            ElectionMessage.feedback(1, F(1, 1), 0, None)

    def test_init_is_idempotent(self):
        t = path_topology([1, 2])
        proto = ElectionProtocol(3.0)
        engine = Engine(t)
        proto.attach(engine)
        proto.elect_init(1, 0.0)
        proto.elect_init(1, 0.0)
        assert engine.transmissions == 1


TOPOLOGIES = list(corpus(ns=(2, 3, 5, 8, 13), seeds=(0, 3)))


def _tid(t):
    return f"{t.base_shape}-{t.n}-{t.connectivity}-{t.seed}"


class TestAgainstOracle:
    @pytest.mark.parametrize('topology', TOPOLOGIES, ids=_tid)
    def test_unit_delays_match_oracle(self, topology):
        result = run_election(topology)
        oracle = oracle_run(topology, 3.0)
        assert result.leader == oracle.leader
        assert result.merge_multiset() == oracle.merge_multiset()
        assert _phase_keys(result.work_phases) == _phase_keys(oracle.work_phases)

    @pytest.mark.parametrize('seed', range(5))
    @pytest.mark.parametrize('topology', TOPOLOGIES[::7], ids=_tid)
    def test_random_delays_do_not_change_outcome(self, topology, seed):
        unit = run_election(topology)
        rand = run_election(topology, delay=DelayModel('random', seed=seed))
        assert rand.leader == unit.leader
        assert rand.merge_multiset() == unit.merge_multiset()
        assert rand.all_know_leader

    @pytest.mark.parametrize('x', [1.5, 2.0, 4.0])
    def test_other_growth_factors(self, x):
        t = generate(20, 'binary_tree', 0.1, seed=6)
        result = run_election(t, x)
        assert result.merge_multiset() == oracle_run(t, x).merge_multiset()


class TestInitiators:
    @pytest.mark.parametrize('initiators', [[1], [5], [2, 9], [12]])
    def test_subset_does_not_change_outcome(self, initiators):
        t = generate(12, 'ring', 0.2, seed=2)
        full = run_election(t)
        part = run_election(t, initiators=initiators)
        assert part.leader == full.leader
        assert part.merge_multiset() == full.merge_multiset()

    def test_everyone_hears_neighbors_within_two_units(self):
        t = generate(15, 'string', 0.1, seed=4)
        result = run_election(t, initiators=[7])
        for node in t.nodes:
            assert result.init_complete_times[node] - result.wake_times[node] <= 2.0

    def test_unknown_initiator(self, string3):
        with pytest.raises(UnknownSenderError):
            run_election(string3, initiators=[42])


class TestAccounting:
    @pytest.mark.parametrize('topology', TOPOLOGIES[::3], ids=_tid)
    def test_per_phase_messages_bounded_by_members(self, topology):
        result = run_election(topology)
        for phase in result.work_phases:
            assert phase.feedback <= phase.new_size - 1
            assert phase.action <= phase.new_size
            assert phase.info <= phase.new_size
        assert result.init_transmissions == topology.n
        assert result.announcement_transmissions == topology.n

    @pytest.mark.parametrize('topology', TOPOLOGIES[::3], ids=_tid)
    def test_time_bound(self, topology):
        result = run_election(topology)
        assert result.time_excl_init <= 9 * topology.n


def test_write_trace(tmp_path):
    result = run_election(complete_topology(3))
    path = tmp_path / 'trace.txt'
    write_trace(result, path)
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    assert lines[0].endswith('(1,1), (1,3)')


def test_bad_growth_factor(string3):
    with pytest.raises(InvalidGrowthFactorError):
        run_election(string3, 1.0)


def test_json_shape():
    payload = run_election(path_topology([1, 2])).to_json()
    assert payload['leader'] == 2
    assert payload['merges'] == [[1.0, [1, 1], [1, 2]]]
    assert {'time_excl_init', 'init_time', 'transmissions', 'work_phases'} <= set(payload)


# -- acceptance-scale corpus runs ----------------------------------------------------------

@pytest.mark.slow
def test_one_leader_known_everywhere():
    for i, topology in enumerate(random_corpus(1000, seed=23)):
        result = run_election(topology, delay=DelayModel('random', seed=i))
        assert result.leader in topology.nodes
        assert result.all_know_leader
        assert set(result.leaders_known.values()) == {result.leader}


@pytest.mark.slow
def test_outcome_independent_of_delays_and_matches_oracle():
    for topology in random_corpus(100, seed=5):
        unit = run_election(topology)
        oracle = oracle_run(topology, 3.0)
        assert unit.leader == oracle.leader
        assert unit.merge_multiset() == oracle.merge_multiset()
        for seed in range(10):
            rand = run_election(topology, delay=DelayModel('random', seed=seed))
            assert rand.leader == unit.leader, (topology.base_shape, topology.n, seed)
            assert rand.merge_multiset() == unit.merge_multiset()
