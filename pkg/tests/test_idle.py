import math

import numpy as np
import pytest

from randterm import graph, idle

from conftest import scenario
from randterm.io import load_idle


def ring(n=6, tau=1.0, lam=1.0, calls=((0, 0.5), (3, 0.5))):
    tau_d = {}
    adj = [[] for _ in range(n)]
    for i in range(n):
        j = (i + 1) % n
        tau_d[(i, j)] = tau
        tau_d[(j, i)] = tau
        adj[i].append(j)
        adj[j].append(i)
    return idle.IdleScenario(node_count=n, adjacency=adj, tau=tau_d, lam=lam,
                             call_nodes=[c[0] for c in calls],
                             call_probs=[c[1] for c in calls])


class TestScenario:
    def test_probabilities_must_sum(self):
        with pytest.raises(ValueError):
            ring(calls=((0, 0.5), (3, 0.6)))

    def test_tau_positive(self):
        with pytest.raises(ValueError):
            ring(tau=-1.0)

    def test_lam_positive(self):
        with pytest.raises(ValueError):
            ring(lam=0.0)


class TestEdgeWaitCost:
    def test_closed_form(self):
        # lam = tau = 1: K = e^-1, p = 1 - e^-1
        assert idle.edge_wait_cost(1.0, 1.0) == pytest.approx(math.exp(-1))

    def test_small_rate_limit(self):
        # K -> lam tau^2 / 2 as lam tau -> 0
        tau, lam = 2.0, 1e-8
        assert idle.edge_wait_cost(tau, lam) == pytest.approx(
            lam * tau ** 2 / 2, rel=1e-6)

    def test_series_matches_direct(self):
        # across the series/direct switchover
        for x in (1e-5, 9e-5, 2e-4, 1e-2):
            direct = (math.exp(-x) - (1 - x)) / 1.0
            assert idle.edge_wait_cost(x, 1.0) == pytest.approx(direct, rel=1e-8)

    def test_monotone_in_tau(self):
        ks = [idle.edge_wait_cost(t, 0.7) for t in np.linspace(0.1, 5, 40)]
        assert np.all(np.diff(ks) > 0)


class TestTravelTimes:
    def test_single_edge(self):
        sc = ring(n=2)
        d = idle.all_pairs_times(sc)
        assert d[0, 1] == 1.0 and d[1, 0] == 1.0

    def test_path_additivity(self):
        sc = ring(n=3, calls=((0, 1.0),))
        d = idle.all_pairs_times(sc)
        assert d[0, 1] == 1.0 and d[0, 2] == 1.0  # ring of 3

    def test_dijkstra_matches_floyd_warshall(self, rng):
        n = 30
        tau = {}
        adj = [[] for _ in range(n)]
        for i in range(n):
            for j in rng.integers(0, n, size=4):
                j = int(j)
                if j != i and (i, j) not in tau:
                    tau[(i, j)] = float(rng.uniform(0.1, 3.0))
                    adj[i].append(j)
            j = (i + 1) % n
            if (i, j) not in tau:
                tau[(i, j)] = 1.0
                adj[i].append(j)
        sc = idle.IdleScenario(node_count=n, adjacency=adj, tau=tau, lam=1.0,
                               call_nodes=[0], call_probs=[1.0])
        d = idle.all_pairs_times(sc)
        for s in range(n):
            assert np.allclose(idle._dijkstra_times(sc, s), d[:, s])

    def test_unreachable_is_inf(self):
        sc = idle.IdleScenario(node_count=2, adjacency=[[1], []],
                               tau={(0, 1): 1.0}, lam=1.0,
                               call_nodes=[1], call_probs=[1.0])
        d = idle.all_pairs_times(sc)
        assert d[1, 0] == math.inf


class TestBuildProblem:
    def test_valid_and_solvable(self):
        pb = idle.build_problem(ring())
        assert graph.validate(pb) == []
        sol = graph.dijkstra_solve(pb)
        # symmetric ring, both calls equidistant: staying put is optimal
        assert np.allclose(sol.V, 1.5)
        assert sol.motionless.all()

    def test_point_mass_call(self):
        sc = ring(calls=((2, 1.0),))
        pb = idle.build_problem(sc)
        assert pb.q[2] == 0.0
        assert pb.q.argmin() == 2
        sol = graph.dijkstra_solve(pb)
        assert sol.motionless[2] and sol.V[2] == 0.0

    def test_point_mass_value_is_discounted_travel(self):
        # single call node: moving toward it beats waiting when lam is small,
        # and V reflects expected arrival time along the shortest path
        sc = ring(n=4, lam=0.1, calls=((0, 1.0),))
        pb = idle.build_problem(sc)
        sol = graph.dijkstra_solve(pb)
        path = graph.extract_path(sol, 2)
        assert path[-1] == 0
        assert graph.path_cost(pb, path) == pytest.approx(sol.V[2], abs=1e-12)
        assert sol.V[2] < pb.q[2]  # repositioning helps

    def test_unreachable_call_rejected(self):
        sc = idle.IdleScenario(node_count=2, adjacency=[[1], []],
                               tau={(0, 1): 1.0}, lam=1.0,
                               call_nodes=[0], call_probs=[1.0])
        with pytest.raises(ValueError):
            idle.build_problem(sc)

    def test_file_round_trip(self):
        sc = load_idle(scenario("idle_ring.txt"))
        pb = idle.build_problem(sc)
        assert pb.node_count == 6
        assert pb.delta == pytest.approx(math.exp(-1))
