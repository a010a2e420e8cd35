# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Distributed leader election over the broadcast engine.

Every node starts as a singleton fragment (1, id) and announces itself with an initialization
INFO. A fragment works once all of its external edges are incoming (every foreign neighbor
has a larger FragmentId): its members feed counts and the largest foreign id back to the
candidate along the fragment's PIF tree. The candidate then either stays active with the
new size, joins its largest neighbor through the edge node adjacent to it, or, with no
foreign neighbor left, becomes the leader and announces itself.

Readiness is evaluated on each node's latest-known id per neighbor. A smaller id blocks: it is
either a member of my fragment that has not relayed the current INFO yet, or an outgoing edge.
"""

import itertools
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from . import engine as sim
from .constants import DEFAULT_GROWTH_FACTOR
from .fragments import FragmentId, MergeEvent, WorkPhase, check_growth_factor

INFO = 'INFO'
FEEDBACK = 'FEEDBACK'
ACTION = 'ACTION'


class ProtocolViolationError(RuntimeError):
    """Raised when a node receives a message its state cannot account for."""
    pass


@dataclass(frozen=True)
class ElectionMessage:
    kind: str
    target: object = None
    parent: object = None
    new_id: object = None
    former: object = None
    final: bool = False
    cycle: object = None
    accumulated: int = 0
    max_external: object = None
    winner: object = None

    @classmethod
    def info(cls, new_id, former, parent, final=False):
        return cls(INFO, parent=parent, new_id=new_id, former=former, final=final)

    @classmethod
    def feedback(cls, target, cycle, accumulated, max_external):
        if accumulated < 1:
            raise ProtocolViolationError(f"feedback count must be at least 1 (got {accumulated})")
        return cls(FEEDBACK, target=target, cycle=cycle, accumulated=accumulated,
                   max_external=max_external)

    @classmethod
    def action(cls, target, winner, former):
        return cls(ACTION, target=target, winner=winner, former=former)

    @property
    def encountered(self):
        return self.max_external is not None

    @property
    def former_identity(self):
        return self.former.identity if self.former is not None else None

    @property
    def initial(self):
        return self.kind == INFO and self.former is None and not self.final

    def summary(self):
        if self.kind == INFO:
            tag = ' final' if self.final else ''
            return f"new={self.new_id} former={self.former} parent={self.parent}{tag}"
        if self.kind == FEEDBACK:
            return (f"target={self.target} cycle={self.cycle} accumulated={self.accumulated} "
                    f"max={self.max_external}")
        return f"target={self.target} winner={self.winner} former={self.former}"


@dataclass
class ElectionNodeState:
    node: int
    awake: bool = False
    woke_at: object = None
    init_complete_at: object = None
    my_fragment: object = None
    parent: object = None
    known_id: dict = field(default_factory=dict)
    known_parent: dict = field(default_factory=dict)
    heard_stamp: dict = field(default_factory=dict)
    child_feedback: dict = field(default_factory=dict)
    fired_cycle: object = None
    best_external: object = None
    gateway: object = None
    return_child: object = None
    subtree_count: int = 0
    leader: object = None
    leader_known_at: object = None
    announced: bool = False

    @property
    def role(self):
        if self.my_fragment is not None and self.my_fragment.identity == self.node:
            return 'candidate'
        return 'member'


class ElectionProtocol(sim.Protocol):
    name = 'election'

    def __init__(self, x=DEFAULT_GROWTH_FACTOR, initiators=None):
        self.x = check_growth_factor(x)
        self._initiators = None if initiators is None else tuple(dict.fromkeys(initiators))
        self.states = {}
        self.topology = None
        self.merges = []
        self.work_phases = []
        self.counts = Counter()
        self.phase_messages = defaultdict(Counter)
        self.init_time = 0.0
        self.decision_time = None
        self.leader = None
        self._stamp = itertools.count()

    def attach(self, engine):
        super().attach(engine)
        self.topology = engine.topology
        if self._initiators is not None:
            if not self._initiators:
                raise ValueError("election needs at least one initiator")
            for node in self._initiators:
                if not self.topology.has_node(node):
                    raise sim.UnknownSenderError(f"unknown initiator {node}")
        self.states = {node: ElectionNodeState(node) for node in self.topology.nodes}

    def initiators(self, topology):
        return self._initiators if self._initiators is not None else topology.nodes

    def init(self, node, now):
        self.elect_init(node, now)

    def on_receive(self, node, sender, payload, now):
        if payload.kind == INFO:
            self.elect_on_info(node, sender, payload, now)
        elif payload.target != node:
            return
        elif payload.kind == FEEDBACK:
            self.states[node].child_feedback[sender] = payload
            self.elect_on_feedback_trigger(node, now)
        else:
            self.elect_on_action(node, sender, payload, now)

    def is_terminated(self):
        return self.leader is not None and all(st.leader is not None for st in self.states.values())

    def node_states(self):
        return self.states

    def _send(self, node, msg, now):
        if msg.kind == INFO:
            if msg.final:
                self.counts['INFO_FINAL'] += 1
            elif msg.initial:
                self.counts['INFO_INIT'] += 1
            else:
                self.counts[INFO] += 1
                self.phase_messages[msg.former]['info'] += 1
        elif msg.kind == FEEDBACK:
            self.counts[FEEDBACK] += 1
            self.phase_messages[msg.cycle]['feedback'] += 1
        else:
            self.counts[ACTION] += 1
            self.phase_messages[msg.former]['action'] += 1
        self.engine.broadcast(node, msg, now)

    def _note_init_progress(self, st, now):
        if st.init_complete_at is None and st.awake and all(
                u in st.known_id for u in self.topology.neighbors(st.node)):
            st.init_complete_at = now

    # -- handlers ------------------------------------------------------------------------

    def elect_init(self, node, now):
        st = self.states[node]
        if st.awake:
            return
        st.awake = True
        st.woke_at = now
        st.my_fragment = FragmentId(1, node)
        st.parent = None
        self._send(node, ElectionMessage.info(st.my_fragment, None, None), now)
        self._note_init_progress(st, now)
        self.elect_on_feedback_trigger(node, now)

    def elect_on_info(self, node, sender, msg, now):
        st = self.states[node]
        if msg.final:
            self._on_announcement(node, msg, now)
            return
        if msg.initial:
            self.init_time = max(self.init_time, now)
        if st.known_id.get(sender) != msg.new_id:
            st.heard_stamp[sender] = next(self._stamp)
        st.known_id[sender] = msg.new_id
        st.known_parent[sender] = msg.parent
        if not st.awake:
            self.elect_init(node, now)
        self._note_init_progress(st, now)

        mine = st.my_fragment
        if msg.new_id != mine and msg.former is not None and msg.former == mine:
            # my fragment moved on (stayed active or joined): adopt and relay
            st.my_fragment = msg.new_id
            st.parent = sender
            self._send(node, ElectionMessage.info(msg.new_id, mine, sender), now)
        self.elect_on_feedback_trigger(node, now)

    def elect_on_feedback_trigger(self, node, now):
        st = self.states[node]
        if not st.awake or st.leader is not None:
            return
        mine = st.my_fragment
        if st.fired_cycle == mine:
            return
        nbrs = self.topology.neighbors(node)
        for u in nbrs:
            known = st.known_id.get(u)
            if known is None or known < mine:
                return
        reports = []
        for u in nbrs:
            if st.known_id[u] == mine and st.known_parent.get(u) == node:
                fb = st.child_feedback.get(u)
                if fb is None or fb.cycle != mine:
                    return
                reports.append((u, fb))

        own_best = max((st.known_id[u] for u in nbrs if st.known_id[u] > mine), default=None)
        best = own_best
        via = node if own_best is not None else None
        for child, fb in reports:
            if fb.max_external is not None and (best is None or fb.max_external > best):
                best, via = fb.max_external, child

        st.fired_cycle = mine
        st.best_external = best
        st.return_child = via
        st.subtree_count = 1 + sum(fb.accumulated for _, fb in reports)
        st.gateway = self._gateway(st, own_best) if own_best is not None else None

        if mine.identity == node:
            self.elect_candidate_decide(node, now)
        else:
            self._send(node, ElectionMessage.feedback(st.parent, mine, st.subtree_count, best), now)

    def elect_candidate_decide(self, node, now):
        st = self.states[node]
        mine = st.my_fragment
        new_size = st.subtree_count
        best = st.best_external

        if best is None:
            outcome = 'leader'
        elif new_size > self.x * best.size:
            outcome = 'stay'
        else:
            outcome = 'join'
        self.work_phases.append(WorkPhase(node, mine, new_size, best, outcome, now))

        if outcome == 'leader':
            self.leader = node
            self.decision_time = now
            st.leader = node
            st.leader_known_at = now
            st.announced = True
            self._send(node, ElectionMessage.info(FragmentId(new_size, node), mine, None,
                                                  final=True), now)
        elif outcome == 'stay':
            st.my_fragment = FragmentId(new_size, node)
            self._send(node, ElectionMessage.info(st.my_fragment, mine, None), now)
        else:
            self.merges.append(MergeEvent(now, mine, best))
            if st.return_child == node:
                self._join(node, best, mine, now)
            else:
                self._send(node, ElectionMessage.action(st.return_child, best, mine), now)

    def elect_on_action(self, node, sender, msg, now):
        st = self.states[node]
        if st.return_child is None or st.fired_cycle != msg.former or st.my_fragment != msg.former:
            raise ProtocolViolationError(
                f"node {node} got ACTION for {msg.former} without a stored return path")
        if st.return_child == node:
            self._join(node, msg.winner, msg.former, now)
        else:
            self._send(node, ElectionMessage.action(st.return_child, msg.winner, msg.former), now)

    def _gateway(self, st, fragment_id):
        heard = [u for u, known in st.known_id.items() if known == fragment_id]
        if not heard:
            return None
        return min(heard, key=lambda u: (st.heard_stamp.get(u, 0), u))

    def _join(self, node, winner, former, now):
        """Edge node of a ceasing fragment: hang it under the gateway into *winner*."""
        st = self.states[node]
        gateway = self._gateway(st, winner)
        if gateway is None:
            raise ProtocolViolationError(f"edge node {node} has no neighbor in {winner}")
        st.gateway = gateway
        st.my_fragment = winner
        st.parent = gateway
        self._send(node, ElectionMessage.info(winner, former, gateway), now)
        self.elect_on_feedback_trigger(node, now)

    def _on_announcement(self, node, msg, now):
        st = self.states[node]
        if st.leader is not None:
            return
        st.leader = msg.new_id.identity
        st.leader_known_at = now
        if not st.announced:
            st.announced = True
            self._send(node, ElectionMessage.info(msg.new_id, msg.former, st.parent, final=True), now)


@dataclass
class ElectionResult:
    leader: int
    x: float
    n: int
    init_time: float
    decision_time: float
    completion_time: float
    transmissions: int
    transmissions_by_kind: dict
    merges: list
    work_phases: list
    leaders_known: dict
    wake_times: dict
    init_complete_times: dict
    metrics: sim.RunMetrics

    @property
    def time_excl_init(self):
        return self.decision_time - self.init_time

    @property
    def init_transmissions(self):
        return self.transmissions_by_kind.get('INFO_INIT', 0)

    @property
    def announcement_transmissions(self):
        return self.transmissions_by_kind.get('INFO_FINAL', 0)

    @property
    def post_init_transmissions(self):
        return self.transmissions - self.init_transmissions

    @property
    def work_messages(self):
        kinds = self.transmissions_by_kind
        return kinds.get(FEEDBACK, 0) + kinds.get(ACTION, 0) + kinds.get(INFO, 0)

    @property
    def all_know_leader(self):
        return all(known == self.leader for known in self.leaders_known.values())

    def merge_multiset(self):
        return Counter(event.key() for event in self.merges)

    def trace_lines(self):
        return [event.to_line() for event in self.merges]

    def to_json(self):
        return {
            'leader': self.leader,
            'x': self.x,
            'time_excl_init': self.time_excl_init,
            'init_time': self.init_time,
            'decision_time': self.decision_time,
            'completion_time': self.completion_time,
            'transmissions': self.transmissions,
            'transmissions_by_kind': dict(self.transmissions_by_kind),
            'merges': [[e.time, e.joiner.to_list(), e.joined.to_list()] for e in self.merges],
            'work_phases': [phase.to_json() for phase in self.work_phases],
        }


def run_election(topology, x=DEFAULT_GROWTH_FACTOR, delay=None, initiators=None,
                 max_events=None, event_log=None, keep_log=False):
    protocol = ElectionProtocol(x, initiators)
    metrics = sim.run(protocol, topology, delay, max_events, event_log, keep_log)
    if protocol.leader is None:
        raise ProtocolViolationError("run drained its event queue without electing a leader")

    for phase in protocol.work_phases:
        counts = protocol.phase_messages.get(phase.entry_id, {})
        phase.feedback = counts.get('feedback', 0)
        phase.action = counts.get('action', 0)
        phase.info = counts.get('info', 0)

    states = protocol.states
    known_at = [st.leader_known_at for st in states.values() if st.leader_known_at is not None]
    return ElectionResult(
        leader=protocol.leader,
        x=protocol.x,
        n=topology.n,
        init_time=protocol.init_time,
        decision_time=protocol.decision_time,
        completion_time=max(known_at),
        transmissions=metrics.transmissions,
        transmissions_by_kind=dict(sorted(protocol.counts.items())),
        merges=list(protocol.merges),
        work_phases=list(protocol.work_phases),
        leaders_known={node: st.leader for node, st in states.items()},
        wake_times={node: st.woke_at for node, st in states.items()},
        init_complete_times={node: st.init_complete_at for node, st in states.items()},
        metrics=metrics,
    )


def write_trace(result, path):
    with open(path, 'w', encoding='utf-8') as fh:
        for line in result.trace_lines():
            fh.write(line + '\n')
