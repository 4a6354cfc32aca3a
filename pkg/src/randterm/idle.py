"""Optimal idle-time repositioning: build a randomly-terminated graph problem
from travel times and a call-location distribution.

While idle, a vehicle may traverse edges taking time tau_ij; calls arrive as a
Poisson process with rate lam.  A transition commits the vehicle to complete
the edge, so a call arriving mid-edge waits for the remainder:

    K_ij = (exp(-lam tau_ij) - (1 - lam tau_ij)) / lam     (expected extra wait)
    p_ij = 1 - exp(-lam tau_ij)                            (call during the edge)

and the terminal cost q(x) is the expected travel time from x to the caller.
Solving the resulting problem yields the minimal expected wait time.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphProblem

# placeholder only: self-loops are free and motionless nodes pay q directly,
# so no solver ever reads the self-loop probability
SELF_LOOP_P = 0.5


@dataclass
class IdleScenario:
    node_count: int
    adjacency: list  # out-neighbors per node, non-self edges
    tau: dict  # (i, j) -> traversal time > 0
    lam: float
    call_nodes: list
    call_probs: list

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("call rate must be positive")
        total = float(np.sum(self.call_probs))
        if abs(total - 1.0) > 1e-12:
            raise ValueError("call probabilities sum to %g, expected 1" % total)
        for (i, j), t in self.tau.items():
            if i != j and t <= 0:
                raise ValueError("tau must be positive on edge (%d,%d)" % (i, j))


def edge_wait_cost(tau, lam):
    """Expected extra wait from committing to an edge of duration tau."""
    x = lam * tau
    if x < 1e-4:
        # series keeps precision where exp(-x) - (1 - x) cancels
        return tau * x / 2.0 * (1.0 - x / 3.0 + x * x / 12.0)
    return (math.exp(-x) - (1.0 - x)) / lam


def _dijkstra_times(scenario, source):
    dist = [math.inf] * scenario.node_count
    dist[source] = 0.0
    heap = [(0.0, source)]
    # travel times are symmetric in usage but the graph is directed; run on
    # reversed edges so dist[x] = min time from x to the source
    rev = [[] for _ in range(scenario.node_count)]
    for (i, j), t in scenario.tau.items():
        if i != j:
            rev[j].append((i, t))
    while heap:
        d, j = heapq.heappop(heap)
        if d > dist[j]:
            continue
        for i, t in rev[j]:
            nd = d + t
            if nd < dist[i]:
                dist[i] = nd
                heapq.heappush(heap, (nd, i))
    return dist


def _floyd_warshall_times(scenario):
    M = scenario.node_count
    d = np.full((M, M), np.inf)
    np.fill_diagonal(d, 0.0)
    for (i, j), t in scenario.tau.items():
        if i != j and t < d[i, j]:
            d[i, j] = t
    for k in range(M):
        d = np.minimum(d, d[:, k : k + 1] + d[k : k + 1, :])
    return d


def all_pairs_times(scenario):
    """Matrix of minimal travel times; d[x, y] = min time from x to y,
    +inf for unreachable pairs."""
    return _floyd_warshall_times(scenario)


def expected_response_times(scenario):
    """q(x) = sum over call nodes of P * d(x, call node).

    Uses per-target Dijkstra when the call support is small, Floyd-Warshall
    otherwise.
    """
    M = scenario.node_count
    support = [n for n, pr in zip(scenario.call_nodes, scenario.call_probs) if pr > 0]
    q = np.zeros(M)
    if len(support) < max(1.0, M / max(math.log(M), 1.0)):
        for node, prob in zip(scenario.call_nodes, scenario.call_probs):
            if prob == 0:
                continue
            dist = _dijkstra_times(scenario, node)
            q += prob * np.array(dist)
    else:
        d = all_pairs_times(scenario)
        for node, prob in zip(scenario.call_nodes, scenario.call_probs):
            q += prob * d[:, node]
    return q


def build_problem(scenario):
    """Assemble the graph problem whose value function is the minimal expected
    wait time for the first call."""
    M = scenario.node_count
    q = expected_response_times(scenario)
    if not np.all(np.isfinite(q)):
        raise ValueError("some node cannot reach a call location")
    adjacency = [sorted(set(nbrs) | {i}) for i, nbrs in enumerate(scenario.adjacency)]
    K = {}
    p = {}
    for i, nbrs in enumerate(adjacency):
        for j in nbrs:
            if i == j:
                K[(i, i)] = 0.0
                p[(i, i)] = SELF_LOOP_P
            else:
                t = scenario.tau[(i, j)]
                K[(i, j)] = edge_wait_cost(t, scenario.lam)
                p[(i, j)] = 1.0 - math.exp(-scenario.lam * t)
    offdiag = [v for (i, j), v in K.items() if i != j]
    delta = min(offdiag) if offdiag else 0.0
    return GraphProblem(node_count=M, adjacency=adjacency, K=K, q=q, p=p,
                        delta=delta)
