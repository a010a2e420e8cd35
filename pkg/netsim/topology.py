# Copyright (c) 2026 BroadcastElect contributors. Licensed under MIT.
"""Broadcast network topologies: data model, validation and the random generator.

A topology is an undirected connected graph over distinct node identities. Random
topologies start from a base shape (string, ring, binary tree or complete graph), place
the labels 1..n on the shape's positions by a seeded permutation, then add a
connectivity-controlled number of extra edges drawn uniformly without replacement.
"""

import json
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP

import networkx as nx
import numpy as np

from .constants import BASE_SHAPES


class TopologyError(ValueError):
    """Base class for invalid topologies and generator arguments."""
    pass


class EmptyTopologyError(TopologyError):
    """Raised for a topology (or generator request) with no nodes."""
    pass


class DuplicateNodeError(TopologyError):
    """Raised when two nodes share an identity."""
    pass


class SelfLoopError(TopologyError):
    """Raised for an edge (a, a)."""
    pass


class DuplicateEdgeError(TopologyError):
    """Raised when the same unordered edge is listed twice."""
    pass


class UnknownNodeError(TopologyError):
    """Raised when an edge names a node that is not in the topology."""
    pass


class DisconnectedTopologyError(TopologyError):
    """Raised when some node is unreachable from the others."""
    pass


class UnsupportedShapeError(TopologyError):
    """Raised for a base shape the generator does not know."""
    pass


def _normalize(u, v):
    return (u, v) if u < v else (v, u)


@dataclass(frozen=True)
class Topology:
    """Immutable graph. ``edges`` is kept as given so ``validate`` can report bad input."""

    nodes: tuple
    edges: tuple
    base_shape: str = 'custom'
    connectivity: float = 0.0
    seed: int = 0
    _neighbors: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        nbrs = {node: set() for node in self.nodes}
        for u, v in self.edges:
            if u == v or u not in nbrs or v not in nbrs:
                continue
            nbrs[u].add(v)
            nbrs[v].add(u)
        object.__setattr__(self, '_neighbors',
                           {node: tuple(sorted(s)) for node, s in nbrs.items()})

    @classmethod
    def from_edges(cls, nodes, edges, base_shape='custom', connectivity=0.0, seed=0):
        return cls(tuple(nodes), tuple((int(u), int(v)) for u, v in edges),
                   base_shape, float(connectivity), int(seed))

    @property
    def n(self):
        return len(self.nodes)

    @property
    def edge_count(self):
        return len(self.edges)

    def neighbors(self, node):
        """Sorted neighbor tuple of *node*. Raises KeyError for unknown nodes."""
        return self._neighbors[node]

    def degree(self, node):
        return len(self._neighbors[node])

    def has_node(self, node):
        return node in self._neighbors

    def canonical_edges(self):
        """Edges as (u, v) with u < v, sorted lexicographically."""
        return sorted({_normalize(u, v) for u, v in self.edges if u != v})

    def to_graph(self):
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        graph.add_edges_from(self.canonical_edges())
        return graph

    def to_json(self):
        payload = {
            'n': self.n,
            'edges': [[u, v] for u, v in self.canonical_edges()],
            'base_shape': self.base_shape,
            'connectivity': self.connectivity,
            'seed': self.seed,
        }
        if tuple(self.nodes) != tuple(range(1, self.n + 1)):
            payload['nodes'] = list(self.nodes)
        return payload

    @classmethod
    def from_json(cls, payload):
        n = int(payload['n'])
        nodes = payload.get('nodes') or list(range(1, n + 1))
        return cls.from_edges(nodes, payload.get('edges', []),
                              payload.get('base_shape', 'custom'),
                              payload.get('connectivity', 0.0),
                              payload.get('seed', 0))


def load(path):
    with open(path, encoding='utf-8') as fh:
        return Topology.from_json(json.load(fh))


def save(topology, path):
    """Write the bit-exact JSON form (sorted edges, u < v)."""
    with open(path, 'w', encoding='utf-8') as fh:
        json.dump(topology.to_json(), fh, sort_keys=True)
        fh.write('\n')


def validate(topology):
    """Check identities, edges and connectivity. Returns None or raises a TopologyError."""
    if topology.n == 0:
        raise EmptyTopologyError("topology has no nodes")
    if len(set(topology.nodes)) != topology.n:
        seen, dups = set(), set()
        for node in topology.nodes:
            (dups if node in seen else seen).add(node)
        raise DuplicateNodeError(f"duplicate node identities: {sorted(dups)}")

    node_set = set(topology.nodes)
    seen_edges = set()
    for u, v in topology.edges:
        if u == v:
            raise SelfLoopError(f"self-loop on node {u}")
        if u not in node_set or v not in node_set:
            missing = u if u not in node_set else v
            raise UnknownNodeError(f"edge ({u}, {v}) names unknown node {missing}")
        key = _normalize(u, v)
        if key in seen_edges:
            raise DuplicateEdgeError(f"edge {key} listed more than once")
        seen_edges.add(key)

    if not nx.is_connected(topology.to_graph()):
        components = nx.number_connected_components(topology.to_graph())
        raise DisconnectedTopologyError(f"topology has {components} connected components")


def _base_positions(n, base_shape):
    """Edges of the base shape over positions 0..n-1."""
    if base_shape == 'string':
        return [(i, i + 1) for i in range(n - 1)]
    if base_shape == 'ring':
        edges = [(i, i + 1) for i in range(n - 1)]
        if n >= 3:
            edges.append((n - 1, 0))
        return edges
    if base_shape == 'binary_tree':
        # heap layout: parent of i is (i - 1) // 2
        return [((i - 1) // 2, i) for i in range(1, n)]
    if base_shape == 'complete':
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    raise UnsupportedShapeError(
        f"unsupported base shape '{base_shape}' (expected one of {', '.join(BASE_SHAPES)})")


def extra_edge_quota(possible, connectivity):
    """round-half-up of C x possible, computed in decimal so 0.3 x 465 rounds to 140."""
    scaled = Decimal(str(connectivity)) * possible
    return int(scaled.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def generate(n, base_shape='string', connectivity=0.0, seed=0):
    """Random connected topology over labels 1..n; a pure function of its arguments."""
    if n is None or n < 1:
        raise EmptyTopologyError(f"n must be at least 1 (got {n})")
    if not 0.0 <= connectivity <= 1.0:
        raise TopologyError(f"connectivity must lie in [0, 1] (got {connectivity})")
    positions = _base_positions(n, base_shape)

    rng = np.random.default_rng(seed)
    labels = [int(x) for x in rng.permutation(np.arange(1, n + 1))]
    edges = {_normalize(labels[i], labels[j]) for i, j in positions}

    possible = n * (n - 1) // 2 - len(edges)
    quota = extra_edge_quota(possible, connectivity)
    if quota > 0:
        missing = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
                   if (u, v) not in edges]
        picks = rng.choice(len(missing), size=quota, replace=False)
        edges.update(missing[int(i)] for i in picks)

    return Topology.from_edges(range(1, n + 1), sorted(edges), base_shape, connectivity, seed)
