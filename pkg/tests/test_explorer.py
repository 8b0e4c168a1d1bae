import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from doublecap import capgeom, explorer
from doublecap.explorer import AnnealConfig, OrthogonalityGraph, SpherePointCloud
from doublecap.hilbert import RandomStream


def random_graph(seed, M, p):
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(M) for j in range(i + 1, M) if rng.random() < p]
    weights = rng.random(M) + 0.05
    return OrthogonalityGraph.from_edges(M, edges, weights / weights.sum())


def exhaustive_mwis(graph):
    """Enumerate every subset; feasible only for tiny graphs."""
    M = graph.size
    adj = [set(map(int, graph.neighbors(v))) for v in range(M)]
    best = 0.0
    for r in range(M + 1):
        for sub in itertools.combinations(range(M), r):
            if all(b not in adj[a] for a, b in itertools.combinations(sub, 2)):
                best = max(best, math.fsum(graph.weights[list(sub)]))
    return best


class TestClouds:
    def test_complex_points_normalized(self):
        c = SpherePointCloud.sample("complex", 3, 200, RandomStream(1))
        assert np.allclose(np.linalg.norm(c.points, axis=1), 1)
        assert c.weights.sum() == pytest.approx(1.0)

    def test_lattice_bloch_map(self):
        c = SpherePointCloud.lattice("complex", 2, 300, RandomStream(2))
        assert c.points.shape == (300, 2)
        assert np.iscomplexobj(c.points)

    def test_lattice_uniform_enough(self):
        # fraction of the d=3 lattice in the double cap tracks the exact volume
        c = SpherePointCloud.lattice("real", 3, 20_000, RandomStream(3))
        frac = np.mean(np.abs(c.points[:, 0]) > math.cos(math.pi / 4))
        assert frac == pytest.approx(capgeom.real_cap_volume(3), abs=2e-3)

    def test_circle(self):
        c = SpherePointCloud.circle(8)
        assert c.points.shape == (8, 2)

    def test_bad_kind(self):
        with pytest.raises(ValueError):
            explorer.make_cloud("octonion", 3, 10, RandomStream(0))


class TestGraph:
    def test_circle_edges(self):
        # 8 points 45 degrees apart: k is orthogonal to k +- 2
        c = SpherePointCloud.circle(8)
        g = explorer.build_graph(c, math.radians(5))
        expect = sorted({tuple(sorted((k, (k + 2) % 8))) for k in range(8)})
        assert sorted(g.edges) == expect

    def test_edges_match_overlaps(self):
        c = SpherePointCloud.sample("real", 3, 300, RandomStream(4))
        delta = math.radians(3)
        g = explorer.build_graph(c, delta)
        ov = c.overlaps()
        np.fill_diagonal(ov, np.inf)
        expect = {(i, j) for i, j in zip(*np.nonzero(ov <= math.sin(delta))) if i < j}
        assert set(g.edges) == expect

    def test_threads_same_graph(self):
        c = SpherePointCloud.sample("complex", 2, 2500, RandomStream(5))
        a = explorer.build_graph(c, 0.05, threads=1)
        b = explorer.build_graph(c, 0.05, threads=3)
        assert np.array_equal(a.indptr, b.indptr) and np.array_equal(a.indices, b.indices)

    @pytest.mark.parametrize("delta", [0.0, math.pi / 4, -1.0])
    def test_delta_range(self, delta):
        with pytest.raises(ValueError):
            explorer.build_graph(SpherePointCloud.circle(4), delta)


class TestSeedAndGreedy:
    @pytest.mark.parametrize("kind, dim", [("real", 2), ("real", 3), ("real", 5), ("complex", 2), ("complex", 3)])
    def test_cap_seed_independent(self, kind, dim):
        c = SpherePointCloud.sample(kind, dim, 1500, RandomStream(6))
        g = explorer.build_graph(c, math.radians(2))
        cap = explorer.double_cap_seed(g)
        assert cap.feasible and len(cap.members) > 0

    def test_cap_seed_density_near_volume(self):
        c = SpherePointCloud.lattice("real", 3, 4000, RandomStream(7))
        g = explorer.build_graph(c, math.radians(1))
        assert explorer.double_cap_seed(g).density == pytest.approx(capgeom.real_cap_volume(3), abs=0.02)

    def test_greedy_extends_initial(self):
        c = SpherePointCloud.sample("real", 3, 800, RandomStream(8))
        g = explorer.build_graph(c, math.radians(2))
        cap = explorer.double_cap_seed(g)
        grown = explorer.greedy_search(g, cap)
        assert set(cap.members) <= set(grown.members)
        assert grown.feasible

    def test_greedy_maximal(self):
        g = random_graph(1, 30, 0.2)
        res = explorer.greedy_search(g)
        blocked = set(res.members)
        for v in res.members:
            blocked.update(map(int, g.neighbors(v)))
        assert blocked == set(range(30))

    def test_rejects_infeasible_initial(self):
        g = OrthogonalityGraph.from_edges(2, [(0, 1)])
        bad = explorer.CandidateSet((0, 1), 1.0, False)
        with pytest.raises(ValueError):
            explorer.greedy_search(g, bad)
        with pytest.raises(ValueError):
            explorer.anneal_search(g, AnnealConfig(moves=10), bad)


class TestExact:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32), st.integers(1, 13), st.floats(0.05, 0.9))
    def test_branch_and_bound_vs_enumeration(self, seed, M, p):
        g = random_graph(seed, M, p)
        res = explorer.brute_force_max_independent(g)
        assert res.feasible
        assert res.density == pytest.approx(exhaustive_mwis(g), abs=1e-12)

    def test_size_limit(self):
        with pytest.raises(ValueError):
            explorer.brute_force_max_independent(random_graph(0, 41, 0.1))

    def test_empty_graph(self):
        g = OrthogonalityGraph.from_edges(5, [])
        assert explorer.brute_force_max_independent(g).density == pytest.approx(1.0)

    def test_complete_graph(self):
        w = [0.1, 0.4, 0.2, 0.3]
        g = OrthogonalityGraph.from_edges(4, list(itertools.combinations(range(4), 2)), w)
        assert explorer.brute_force_max_independent(g).members == (1,)


class TestAnneal:
    @pytest.mark.parametrize("seed", range(5))
    def test_matches_exact_small(self, seed):
        g = random_graph(100 + seed, 25, 0.15)
        exact = explorer.brute_force_max_independent(g).density
        res = explorer.anneal_search(g, AnnealConfig(moves=200_000, seed=seed))
        assert res.feasible
        assert res.density == pytest.approx(exact, abs=1e-12)

    def test_never_worse_than_initial(self):
        g = random_graph(7, 30, 0.3)
        start = explorer.greedy_search(g)
        res = explorer.anneal_search(g, AnnealConfig(moves=50, seed=1), start)
        assert res.density >= start.density - 1e-15

    def test_deterministic(self):
        g = random_graph(9, 35, 0.2)
        a = explorer.anneal_search(g, AnnealConfig(moves=30_000, seed=3))
        b = explorer.anneal_search(g, AnnealConfig(moves=30_000, seed=3))
        assert a == b

    def test_config_validation(self):
        with pytest.raises(ValueError):
            AnnealConfig(moves=0)
        with pytest.raises(ValueError):
            AnnealConfig(t_start=0.1, t_end=1.0)


class TestExplore:
    def test_report_fields(self):
        rep = explorer.explore("real", 3, 600, math.radians(3), budget=20_000, seed=1)
        d = rep.to_dict(timing=False)
        assert list(d) == [
            "kind", "dim", "M", "delta_radians", "seed", "best_density",
            "target_volume", "gap", "feasible", "iterations", "elapsed_seconds",
        ]
        assert d["elapsed_seconds"] is None
        assert rep.feasible
        assert rep.best_density >= rep.greedy_density >= rep.seed_density
        assert d["gap"] == pytest.approx(rep.target_volume - rep.best_density)
        json.loads(rep.to_json())

    def test_reproducible(self):
        a = explorer.explore("complex", 2, 500, math.radians(3), budget=20_000, seed=4).to_dict(timing=False)
        b = explorer.explore("complex", 2, 500, math.radians(3), budget=20_000, seed=4).to_dict(timing=False)
        assert a == b

    def test_higher_dimension_random_cloud(self):
        rep = explorer.explore("real", 4, 800, math.radians(4), budget=20_000, seed=0)
        assert rep.feasible
        assert rep.target_volume == pytest.approx(capgeom.real_cap_volume(4))

    def test_ladder_monotone(self):
        cloud = SpherePointCloud.lattice("real", 3, 800, RandomStream(2))
        ladder = explorer.delta_ladder(cloud, [math.radians(x) for x in (2, 6, 4)], budget=20_000, seed=1)
        assert [d for d, _ in ladder] == sorted((d for d, _ in ladder), reverse=True)
        dens = [c.density for _, c in ladder]
        assert all(b >= a - 1e-15 for a, b in zip(dens, dens[1:]))
        assert all(c.feasible for _, c in ladder)

    def test_input_checks(self):
        with pytest.raises(ValueError):
            explorer.explore("real", 3, 1, 0.05)
        with pytest.raises(ValueError):
            explorer.explore("real", 3, 100, 0.05, budget=0)
