# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Fragment-level election oracle and the closed-form time and message bounds.

The oracle runs the fragment state machine in synchronous steps: every fragment whose
external edges are all incoming works, compares its member count against X times its
largest neighbor, and either stays active, joins that neighbor or, with no neighbor, becomes
leader. The outcome is delay independent, so it is the reference for distributed runs.
"""

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .fragments import (FragmentId, InvalidGrowthFactorError, MergeEvent, WorkPhase,
                        check_growth_factor)

__all__ = [
    'Fragment', 'FragmentGraph', 'InvalidFragmentGraphError', 'InvalidGrowthFactorError',
    'OracleResult', 'oracle_step', 'oracle_run', 'time_factor', 'time_bound', 'work_periods',
    'message_bound', 'work_message_bound', 'optimal_x', 'bound_table',
]


class InvalidFragmentGraphError(ValueError):
    """Raised when fragment members do not partition the nodes or no fragment can work."""
    pass


@dataclass
class Fragment:
    id: FragmentId
    members: set
    state: str = 'wait'  # wait | work | leader | ceased


class FragmentGraph:
    """Fragments over a topology, keyed by candidate identity."""

    def __init__(self, topology, fragments=None):
        self.topology = topology
        if fragments is None:
            fragments = {node: Fragment(FragmentId(1, node), {node}) for node in topology.nodes}
        self.fragments = fragments
        self.owner = {}
        for key, frag in fragments.items():
            for node in frag.members:
                self.owner[node] = key

    @classmethod
    def from_topology(cls, topology):
        return cls(topology)

    def copy(self):
        return FragmentGraph(self.topology, {
            key: Fragment(f.id, set(f.members), f.state) for key, f in self.fragments.items()})

    def validate(self):
        seen = set()
        for key, frag in self.fragments.items():
            if frag.id.identity != key or key not in frag.members:
                raise InvalidFragmentGraphError(f"fragment {frag.id} does not contain its candidate")
            if seen & frag.members:
                raise InvalidFragmentGraphError(f"fragment {frag.id} overlaps another fragment")
            seen |= frag.members
        if seen != set(self.topology.nodes):
            raise InvalidFragmentGraphError("fragment members do not cover the node set")

    def neighbor_keys(self, key):
        out = set()
        for node in self.fragments[key].members:
            for u in self.topology.neighbors(node):
                other = self.owner[u]
                if other != key:
                    out.add(other)
        return out

    def eligible(self):
        """Keys of fragments whose external edges are all incoming, ascending by id."""
        keys = []
        for key, frag in self.fragments.items():
            if all(self.fragments[k].id > frag.id for k in self.neighbor_keys(key)):
                keys.append(key)
        return sorted(keys, key=lambda k: self.fragments[k].id)

    def ids(self):
        return sorted(f.id for f in self.fragments.values())


def oracle_step(g, x, step=0):
    """Run one synchronous step. Returns (new graph, work phases of this step, merge events)."""
    x = check_growth_factor(x)
    g = g.copy()
    eligible = g.eligible()
    if not eligible:
        raise InvalidFragmentGraphError("no fragment can enter work")

    phases, merges = [], []
    for key in eligible:
        frag = g.fragments[key]
        frag.state = 'work'
        entry = frag.id
        new_size = len(frag.members)
        nbrs = g.neighbor_keys(key)
        if not nbrs:
            frag.id = FragmentId(new_size, key)
            frag.state = 'leader'
            phases.append(WorkPhase(key, entry, new_size, None, 'leader', step))
            continue
        target = max(nbrs, key=lambda k: g.fragments[k].id)
        best = g.fragments[target].id
        if new_size > x * best.size:
            frag.id = FragmentId(new_size, key)
            frag.state = 'wait'
            phases.append(WorkPhase(key, entry, new_size, best, 'stay', step))
        else:
            frag.state = 'ceased'
            g.fragments[target].members |= frag.members
            for node in frag.members:
                g.owner[node] = target
            del g.fragments[key]
            phases.append(WorkPhase(key, entry, new_size, best, 'join', step))
            merges.append(MergeEvent(step, entry, best))
    return g, phases, merges


@dataclass
class OracleResult:
    leader: int
    merges: list
    work_phases: list
    steps: int
    work_phase_counts: dict = field(default_factory=dict)

    def merge_multiset(self):
        return Counter(event.key() for event in self.merges)

    def to_json(self):
        return {
            'leader': self.leader,
            'steps': self.steps,
            'merges': [[e.time, e.joiner.to_list(), e.joined.to_list()] for e in self.merges],
            'work_phases': [p.to_json() for p in self.work_phases],
            'work_phase_counts': {str(k): v for k, v in self.work_phase_counts.items()},
        }


def oracle_run(topology, x):
    """Iterate oracle_step until one fragment is leader."""
    x = check_growth_factor(x)
    g = FragmentGraph.from_topology(topology)
    g.validate()
    merges, phases = [], []
    step = 0
    while True:
        step += 1
        g, step_phases, step_merges = oracle_step(g, x, step)
        phases.extend(step_phases)
        merges.extend(step_merges)
        leaders = [p.candidate for p in step_phases if p.outcome == 'leader']
        if leaders:
            counts = {}
            for p in phases:
                counts[p.candidate] = counts.get(p.candidate, 0) + 1
            return OracleResult(leaders[0], merges, phases, step, counts)


# -- closed-form bounds ------------------------------------------------------------------

def time_factor(x):
    x = check_growth_factor(x)
    return (x * x + 3 * x) / (x - 1)


def time_bound(x, n):
    """Upper bound on decision time excluding initialization, in delay units."""
    return time_factor(x) * n


def work_periods(x, n):
    """Work periods a node can take part in; never below one."""
    x = check_growth_factor(x)
    if n < 1:
        raise ValueError(f"n must be at least 1 (got {n})")
    periods = (math.log2(n) - math.log2(1 + x)) / math.log2((x + 1) / x) + 1
    return max(1.0, periods)


def message_bound(x, n):
    """Closed-form transmission bound; lacks the per-period factor of 3 in work_message_bound."""
    return work_periods(x, n) * n


def work_message_bound(x, n):
    """Bound from the per-node accounting: at most FEEDBACK, ACTION and INFO once per work
    period, over work_periods(x, n) periods."""
    return 3 * work_periods(x, n) * n


def optimal_x():
    """argmin of the time factor over X > 1.

    The derivative's numerator is X^2 - 2X - 3, zero at X = 3; a grid scan must agree.
    """
    closed_form = 3.0
    grid = np.linspace(1.05, 12.0, 200_001)
    factors = (grid ** 2 + 3 * grid) / (grid - 1)
    numeric = float(grid[int(np.argmin(factors))])
    if abs(numeric - closed_form) > 1e-3:
        raise RuntimeError(f"numeric minimum {numeric} disagrees with closed form {closed_form}")
    return closed_form


def bound_table(n, xs):
    rows = []
    for x in xs:
        rows.append({
            'x': float(x),
            'time_factor': time_factor(x),
            'time_bound': time_bound(x, n),
            'work_periods': work_periods(x, n),
            'message_bound': message_bound(x, n),
            'work_message_bound': work_message_bound(x, n),
        })
    return pd.DataFrame(rows, columns=['x', 'time_factor', 'time_bound', 'work_periods',
                                       'message_bound', 'work_message_bound'])
