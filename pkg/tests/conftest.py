import itertools

import numpy as np
import pytest

from netsim.constants import BASE_SHAPES
from netsim.topology import Topology, generate


def path_topology(order):
    """String over the given label order, e.g. [1, 2, 3] -> 1-2-3."""
    return Topology.from_edges(sorted(order), list(zip(order, order[1:])), 'string')


def complete_topology(n):
    return Topology.from_edges(range(1, n + 1), itertools.combinations(range(1, n + 1), 2),
                               'complete', 1.0)


def corpus(ns=(1, 2, 3, 5, 8, 13, 21), shapes=('string', 'ring', 'binary_tree', 'complete'),
           connectivities=(0.0, 0.3, 1.0), seeds=(0, 1)):
    for n in ns:
        for shape in shapes:
            for c in connectivities:
                for seed in seeds:
                    yield generate(n, shape, c, seed)


def random_corpus(count, seed, max_n=64, connectivities=(0.0, 0.3, 1.0)):
    """*count* topologies, n drawn from 1..max_n, base shapes taken in turn."""
    rng = np.random.default_rng(seed)
    for i in range(count):
        n = int(rng.integers(1, max_n + 1))
        c = float(rng.choice(connectivities))
        yield generate(n, BASE_SHAPES[i % len(BASE_SHAPES)], c, int(rng.integers(2**31)))


@pytest.fixture
def string3():
    return path_topology([1, 2, 3])


@pytest.fixture
def k4():
    return complete_topology(4)


@pytest.fixture
def single():
    return Topology.from_edges([1], [])
