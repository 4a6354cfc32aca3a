import os

import numpy as np
import pytest

from randterm.cli import random_graph_problem
from randterm.graph import GraphProblem

SCENARIOS = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def scenario(name):
    return os.path.join(SCENARIOS, name)


def make_graph(q, edges, p, node_count=None):
    """Build a GraphProblem from terminal costs and (i, j, K) edges; self-loops
    with K=0 are added automatically, p is uniform."""
    M = node_count or len(q)
    adjacency = [[i] for i in range(M)]
    K = {(i, i): 0.0 for i in range(M)}
    pd = {(i, i): p for i in range(M)}
    for i, j, kij in edges:
        if j not in adjacency[i]:
            adjacency[i].append(j)
        K[(i, j)] = kij
        pd[(i, j)] = p
    for nbrs in adjacency:
        nbrs.sort()
    offdiag = [v for (i, j), v in K.items() if i != j]
    delta = min(offdiag) if offdiag else 0.0
    return GraphProblem(node_count=M, adjacency=adjacency, K=K,
                        q=np.asarray(q, float), p=pd, delta=max(delta, 0.0))


def fig1b(p):
    """Three-node chain: q=(1,10,0), free transitions; V = (min(1,10p),0,0)."""
    return make_graph([1.0, 10.0, 0.0], [(0, 1, 0.0), (1, 2, 0.0)], p)


def fig2(p, C=1.0):
    """Chain q=(10,9,0), K=(1,C); V_0 = 2+8p when C=1."""
    return make_graph([10.0, 9.0, 0.0], [(0, 1, 1.0), (1, 2, C)], p)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=range(5))
def random_problem(request):
    return random_graph_problem(request.param, nodes=60, degree=5)
