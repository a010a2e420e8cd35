# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Propagation of information with feedback (PIF) over the broadcast engine.

The source floods MSG(None, s, 0); every node rebroadcasts once on first reception, adopting
the sender as parent, and sends one feedback MSG(parent, me, parent) once it has heard from
every neighbor. The source terminates when it has heard from all of its neighbors. Several
sources may run independent propagations at once; node state is kept per source.
"""

from dataclasses import dataclass, field

from . import engine as sim


class PropagationIncompleteError(RuntimeError):
    """Raised when a tree is requested from a propagation that has not terminated."""
    pass


@dataclass(frozen=True)
class PifMessage:
    source: int
    target: object  # None for the flooding phase, the parent's id for feedback
    l: int
    parent: object

    kind = 'MSG'

    @property
    def is_feedback(self):
        return self.target is not None

    def summary(self):
        return f"source={self.source} target={self.target} l={self.l} parent={self.parent}"


@dataclass
class PifNodeState:
    m: bool = False
    parent: object = None
    N: dict = field(default_factory=dict)
    fed_back: bool = False
    terminated: bool = False
    reached_at: object = None
    terminated_at: object = None


class PifProtocol(sim.Protocol):
    name = 'pif'

    def __init__(self, sources):
        self.sources = tuple(dict.fromkeys(sources))
        if not self.sources:
            raise ValueError("PIF needs at least one source")
        self.states = {}
        self.topology = None

    def attach(self, engine):
        super().attach(engine)
        self.topology = engine.topology
        for source in self.sources:
            if not self.topology.has_node(source):
                raise sim.UnknownSenderError(f"unknown PIF source {source}")
        self.states = {
            source: {node: PifNodeState(N={u: False for u in self.topology.neighbors(node)})
                     for node in self.topology.nodes}
            for source in self.sources
        }

    def initiators(self, topology):
        return self.sources

    def init(self, node, now):
        self.pif_on_start(node, now)

    def on_receive(self, node, sender, payload, now):
        self.pif_on_receive(node, sender, payload, now)

    def pif_on_start(self, node, now):
        st = self.states[node][node]
        if st.m:
            return  # duplicate START
        st.m = True
        st.parent = None
        st.reached_at = now
        self.engine.broadcast(node, PifMessage(node, None, node, None), now)
        self._check_complete(node, node, now)

    def pif_on_receive(self, node, sender, msg, now):
        st = self.states[msg.source][node]
        if msg.target is not None and msg.target != node:
            return
        if msg.target is None and msg.parent == node:
            # a child's flood; its N flag is set by its feedback
            return
        st.N[sender] = True
        if not st.m:
            st.m = True
            st.parent = sender
            st.reached_at = now
            self.engine.broadcast(node, PifMessage(msg.source, None, node, sender), now)
        self._check_complete(msg.source, node, now)

    def _check_complete(self, source, node, now):
        st = self.states[source][node]
        if not all(st.N.values()):
            return
        if node == source:
            if not st.terminated:
                st.terminated = True
                st.terminated_at = now
        elif not st.fed_back:
            st.fed_back = True
            self.engine.broadcast(node, PifMessage(source, st.parent, node, st.parent), now)

    def terminated(self, source):
        return self.states[source][source].terminated

    def is_terminated(self):
        return all(self.terminated(source) for source in self.sources)

    def node_states(self):
        return self.states

    def pif_extract_tree(self, source=None):
        """(child, parent) pairs of the propagation tree, sorted by child."""
        source = self.sources[0] if source is None else source
        if source not in self.states or not self.terminated(source):
            raise PropagationIncompleteError(f"propagation from {source} has not terminated")
        return sorted((node, st.parent) for node, st in self.states[source].items()
                      if st.parent is not None)


@dataclass
class PifResult:
    sources: tuple
    termination_times: dict
    transmissions: int
    trees: dict
    metrics: sim.RunMetrics

    @property
    def time(self):
        return max(self.termination_times.values())

    @property
    def tree(self):
        return self.trees[self.sources[0]]

    def to_json(self):
        if len(self.sources) == 1:
            return {'time': self.time, 'transmissions': self.transmissions,
                    'tree': [list(pair) for pair in self.tree]}
        return {
            'time': self.time,
            'transmissions': self.transmissions,
            'propagations': [
                {'source': s, 'time': self.termination_times[s],
                 'tree': [list(pair) for pair in self.trees[s]]}
                for s in self.sources
            ],
        }


def run_pif(topology, sources, delay=None, max_events=None, event_log=None, keep_log=False):
    if isinstance(sources, int):
        sources = (sources,)
    protocol = PifProtocol(sources)
    metrics = sim.run(protocol, topology, delay, max_events, event_log, keep_log)
    trees = {s: protocol.pif_extract_tree(s) for s in protocol.sources}
    times = {s: protocol.states[s][s].terminated_at for s in protocol.sources}
    return PifResult(protocol.sources, times, metrics.transmissions, trees, metrics)
