# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Discrete-event engine for the broadcast communication model.

One transmission is heard by every neighbor of the sender and costs exactly one unit of the
transmission counter. Channels are reliable and FIFO per ordered (sender, receiver) pair; each
delivery is delayed by a sampled 0 < d <= bound. Events are processed in (arrival_time, seq)
order, seq being a global creation counter, so a run is a pure function of its inputs.
"""

import heapq
import itertools
import os
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .constants import DEFAULT_DELAY_BOUND, DEFAULT_MAX_EVENTS, DELAY_ALIASES, DELAY_KINDS


class UnknownSenderError(ValueError):
    """Raised when a node that is not in the topology tries to broadcast."""
    pass


class DelayModelError(ValueError):
    """Raised for an unknown delay kind or a sampled delay outside (0, bound]."""
    pass


class EventLimitExceeded(RuntimeError):
    """Raised when a run processes more events than the configured guard allows."""

    def __init__(self, events, now):
        super().__init__(f"event limit exceeded after {events:,} events at simulated time {now:.6f}")
        self.events = events
        self.now = now


@dataclass(order=True)
class Event:
    arrival_time: float
    seq: int
    receiver: int = field(compare=False)
    sender: int = field(compare=False)
    payload: object = field(compare=False)


class DelayModel:
    """Per-delivery delay sampler.

    ``unit`` always returns ``bound``. ``uniform_random`` draws from (0, bound] with a numpy
    generator seeded by ``seed``. ``custom`` calls ``func(sender, receiver, now, rng)`` and
    checks the result.
    """

    def __init__(self, kind='unit', seed=0, bound=DEFAULT_DELAY_BOUND, func=None):
        kind = DELAY_ALIASES.get(kind, kind)
        if kind not in DELAY_KINDS:
            raise DelayModelError(f"unknown delay kind '{kind}' (expected one of {', '.join(DELAY_KINDS)})")
        if not bound > 0:
            raise DelayModelError(f"delay bound must be positive (got {bound})")
        if kind == 'custom' and func is None:
            raise DelayModelError("custom delay model needs a sampling function")
        self.kind = kind
        self.seed = int(seed)
        self.bound = float(bound)
        self.func = func

    def __repr__(self):
        return f"DelayModel(kind={self.kind!r}, seed={self.seed}, bound={self.bound})"

    def make_rng(self):
        return np.random.default_rng(self.seed)

    def sample(self, rng, sender, receiver, now):
        if self.kind == 'unit':
            return self.bound
        if self.kind == 'uniform_random':
            # random() is in [0, 1); flip it so zero is excluded and bound included
            return self.bound * (1.0 - rng.random())
        d = float(self.func(sender, receiver, now, rng))
        if not 0.0 < d <= self.bound:
            raise DelayModelError(
                f"custom delay {d} for {sender}->{receiver} outside (0, {self.bound}]")
        return d


def resolve_max_events(max_events=None):
    """Explicit value, else NETSIM_MAX_EVENTS, else the constant default."""
    if max_events is not None:
        return int(max_events)
    env = os.environ.get('NETSIM_MAX_EVENTS')
    if env:
        return int(env)
    return DEFAULT_MAX_EVENTS


def _kind_of(payload):
    return getattr(payload, 'kind', type(payload).__name__)


def _summary_of(payload):
    summary = getattr(payload, 'summary', None)
    return summary() if callable(summary) else repr(payload)


@dataclass
class RunMetrics:
    final_time: float = 0.0
    events_processed: int = 0
    transmissions: int = 0
    transmissions_by_kind: dict = field(default_factory=dict)
    transmissions_by_node: dict = field(default_factory=dict)
    terminated: bool = False
    states: dict = field(default_factory=dict)
    deliveries: list = field(default_factory=list)


class Protocol:
    """Per-node automaton driven by the engine. The base class does nothing."""

    name = 'noop'

    def attach(self, engine):
        self.engine = engine

    def initiators(self, topology):
        return topology.nodes

    def init(self, node, now):
        pass

    def on_receive(self, node, sender, payload, now):
        pass

    def is_terminated(self):
        return False

    def node_states(self):
        return {}


class Engine:
    def __init__(self, topology, delay=None, max_events=None, event_log=None, keep_log=False):
        self.topology = topology
        self.delay = delay or DelayModel()
        self.max_events = resolve_max_events(max_events)
        self.now = 0.0
        self.transmissions = 0
        self.by_kind = Counter()
        self.by_node = Counter()
        self.events_processed = 0
        self.deliveries = [] if keep_log else None
        self._rng = self.delay.make_rng()
        self._queue = []
        self._seq = itertools.count()
        self._last_arrival = {}
        self._log_fh = event_log

    def broadcast(self, sender, payload, now=None):
        """Queue one delivery per neighbor of *sender*; counts as a single transmission."""
        if not self.topology.has_node(sender):
            raise UnknownSenderError(f"unknown sender {sender}")
        now = self.now if now is None else now
        for receiver in self.topology.neighbors(sender):
            arrival = now + self.delay.sample(self._rng, sender, receiver, now)
            last = self._last_arrival.get((sender, receiver))
            if last is not None and arrival <= last:
                arrival = float(np.nextafter(last, np.inf))
            self._last_arrival[(sender, receiver)] = arrival
            heapq.heappush(self._queue, Event(arrival, next(self._seq), receiver, sender, payload))
        self.transmissions += 1
        self.by_kind[_kind_of(payload)] += 1
        self.by_node[sender] += 1
        return 1

    @property
    def pending(self):
        return len(self._queue)

    def _record(self, event):
        kind = _kind_of(event.payload)
        if self.deliveries is not None:
            self.deliveries.append((event.arrival_time, event.seq, event.sender, event.receiver, kind))
        if self._log_fh is not None:
            self._log_fh.write(f"{event.arrival_time:.9f}\t{event.sender}\t{event.receiver}\t"
                               f"{kind}\t{_summary_of(event.payload)}\n")

    def step(self, protocol):
        """Deliver the next event to *protocol*. Returns the event, or None when idle."""
        if not self._queue:
            return None
        if self.events_processed >= self.max_events:
            raise EventLimitExceeded(self.events_processed, self.now)
        event = heapq.heappop(self._queue)
        self.now = event.arrival_time
        self.events_processed += 1
        self._record(event)
        protocol.on_receive(event.receiver, event.sender, event.payload, self.now)
        return event

    def run(self, protocol, stop_on_termination=False):
        protocol.attach(self)
        for node in protocol.initiators(self.topology):
            protocol.init(node, self.now)

        while self._queue:
            if stop_on_termination and protocol.is_terminated():
                break
            self.step(protocol)

        return RunMetrics(
            final_time=self.now,
            events_processed=self.events_processed,
            transmissions=self.transmissions,
            transmissions_by_kind=dict(sorted(self.by_kind.items())),
            transmissions_by_node=dict(sorted(self.by_node.items())),
            terminated=protocol.is_terminated(),
            states=protocol.node_states(),
            deliveries=self.deliveries or [],
        )


def run(protocol, topology, delay=None, max_events=None, event_log=None, keep_log=False,
        stop_on_termination=False):
    """Run *protocol* over *topology* until the queue drains.

    *event_log* is a path; when given, one tab-separated line per delivery is written there
    (arrival_time, sender, receiver, kind, summary).
    """
    if event_log is None:
        engine = Engine(topology, delay, max_events, keep_log=keep_log)
        return engine.run(protocol, stop_on_termination)
    with open(event_log, 'w', encoding='utf-8') as fh:
        engine = Engine(topology, delay, max_events, event_log=fh, keep_log=keep_log)
        return engine.run(protocol, stop_on_termination)
