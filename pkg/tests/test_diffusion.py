import numpy as np
import pytest

from decarbsim.diffusion import (AdoptionParams, DegreeTooLarge, EmptyAdopterSet,
                                 adoption_probability, adopter_edge_counts,
                                 build_network, hotspot_index,
                                 run_diffusion_experiment)


def ring_regions(n):
    return np.zeros(n, dtype=np.int64)


def bfs_mean_path(graph, sources):
    """Mean shortest-path length from sampled sources (BFS oracle)."""
    total, count = 0, 0
    for s in sources:
        dist = np.full(graph.n_nodes, -1, dtype=np.int64)
        dist[s] = 0
        frontier = [s]
        while frontier:
            nxt = []
            for u in frontier:
                for v in graph.neighbors(u):
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        reached = dist > 0
        total += int(dist[reached].sum())
        count += int(reached.sum())
    return total / count


def params(base=-3.0, price=-1.0, income=0.0, peer=2.0, subsidy=0.0):
    return AdoptionParams(base_utility=base, price_coeff=price, income_coeff=income,
                          peer_coeff=peer, subsidy_coeff=subsidy)


class TestBuildNetwork:
    def test_ring_lattice_when_p_zero(self):
        g = build_network(ring_regions(50), 6, 0.0, seed=1)
        assert np.all(g.degrees() == 6)
        nb = set(g.neighbors(0).tolist())
        assert nb == {1, 2, 3, 47, 48, 49}

    def test_determinism(self):
        a = build_network(ring_regions(300), 8, 0.3, seed=9)
        b = build_network(ring_regions(300), 8, 0.3, seed=9)
        assert np.array_equal(a.indptr, b.indptr)
        assert np.array_equal(a.indices, b.indices)
        c = build_network(ring_regions(300), 8, 0.3, seed=10)
        assert not np.array_equal(a.indices, c.indices)

    def test_graph_invariants_after_rewiring(self):
        g = build_network(ring_regions(500), 8, 0.4, seed=3)
        seen = set()
        for i in range(g.n_nodes):
            for j in g.neighbors(i):
                assert i != j
                key = (min(i, int(j)), max(i, int(j)))
                seen.add(key)
                assert i in g.neighbors(int(j))  # undirected
        assert len(seen) == g.n_edges
        for i in range(g.n_nodes):
            nbrs = g.neighbors(i).tolist()
            assert len(nbrs) == len(set(nbrs))  # no duplicate edges

    def test_rewiring_shortens_paths(self):
        ring = build_network(ring_regions(1000), 8, 0.0, seed=5)
        rewired = build_network(ring_regions(1000), 8, 1.0, seed=5)
        sources = list(range(0, 1000, 100))
        l_ring = bfs_mean_path(ring, sources)
        l_rew = bfs_mean_path(rewired, sources)
        assert l_ring / l_rew >= 5.0

    def test_degree_too_large(self):
        with pytest.raises(DegreeTooLarge):
            build_network(ring_regions(10), 10, 0.0, seed=1)
        with pytest.raises(ValueError):
            build_network(ring_regions(10), 5, 0.0, seed=1)

    def test_region_grouping_orders_ring(self):
        regions = np.array([1, 0, 1, 0, 1, 0, 1, 0], dtype=np.int64)
        g = build_network(regions, 2, 0.0, seed=2)
        # ring order sorts by (region, id): 1,3,5,7,0,2,4,6: node 1 sits
        # between the wrap-around node 6 and node 3
        assert set(g.neighbors(1).tolist()) == {6, 3}


class TestAdoptionProbability:
    def test_direct_evaluation(self):
        p = adoption_probability(params(base=-3.0, price=-1.0, peer=2.0),
                                 income=2.0, price=1.0, peer_share=0.5, subsidy=0.0)
        assert p == pytest.approx(0.07586, abs=1e-4)

    def test_peer_coeff_zero_means_peer_blind(self):
        pr = params(peer=0.0)
        p0 = adoption_probability(pr, 2.0, 1.0, 0.0, 0.0)
        p1 = adoption_probability(pr, 2.0, 1.0, 1.0, 0.0)
        assert p0 == p1

    def test_monotonicity_sweeps(self):
        pr = params(base=-2.0, price=-1.5, peer=2.5, subsidy=1.0)
        # non-decreasing in peer share and subsidy, non-increasing in price
        peers = [adoption_probability(pr, 2.0, 1.0, s, 0.0) for s in np.linspace(0, 1, 11)]
        assert all(a <= b for a, b in zip(peers, peers[1:]))
        subs = [adoption_probability(pr, 2.0, 1.0, 0.5, s) for s in np.linspace(0, 0.9, 10)]
        assert all(a <= b for a, b in zip(subs, subs[1:]))
        prices = [adoption_probability(pr, 2.0, p, 0.5, 0.0) for p in np.linspace(0.5, 5, 10)]
        assert all(a >= b for a, b in zip(prices, prices[1:]))

    def test_bounds(self):
        for z in (-60, -3, 0, 3, 60):
            p = adoption_probability(params(base=float(z), price=0.0, peer=0.0),
                                     income=1.0, price=1.0, peer_share=0.0, subsidy=0.0)
            assert 0.0 < p < 1.0


class TestDiffusionStep:
    def test_saturated_negative_base_never_adopts(self):
        _, adopted = run_diffusion_experiment(
            n=400, degree_k=6, rewire_p=0.05, params=params(base=-50.0, price=0.0),
            price=10.0, income=20.0, cluster_frac=0.0, quarters=100, seed=4)
        assert adopted.sum() == 0

    def test_saturated_positive_base_adopts_all_solvent(self):
        _, adopted = run_diffusion_experiment(
            n=400, degree_k=6, rewire_p=0.05, params=params(base=50.0, price=0.0),
            price=10.0, income=20.0, cluster_frac=0.01, quarters=1, seed=4)
        assert adopted.sum() == 400

    def test_adoption_monotone_in_time(self):
        from decarbsim import rng
        from decarbsim.diffusion import build_network, decide_adoptions
        n = 500
        g = build_network(ring_regions(n), 6, 0.05, seed=8)
        adopted = np.zeros(n, dtype=np.uint8)
        adopted[:5] = 1
        incomes = np.full(n, 20.0)
        deposits = np.full(n, 10_000, dtype=np.int64)
        prev = set(np.where(adopted)[0].tolist())
        for t in range(30):
            new = decide_adoptions(g, adopted, params(base=-2.5), incomes, 10.0, 0.0,
                                   deposits, 1000, 11, rng.STREAM_DIFFUSION, t)
            adopted |= new
            cur = set(np.where(adopted)[0].tolist())
            assert prev <= cur
            prev = cur

    def test_insolvent_households_defer(self):
        from decarbsim import rng
        from decarbsim.diffusion import decide_adoptions
        n = 100
        g = build_network(ring_regions(n), 4, 0.0, seed=2)
        adopted = np.zeros(n, dtype=np.uint8)
        incomes = np.full(n, 20.0)
        deposits = np.zeros(n, dtype=np.int64)
        deposits[:50] = 10_000
        new = decide_adoptions(g, adopted, params(base=50.0, price=0.0), incomes,
                               10.0, 0.0, deposits, 1000, 3, rng.STREAM_DIFFUSION, 0)
        assert np.all(new[50:] == 0)
        assert np.all(new[:50] == 1)


class TestHotspotIndex:
    def test_all_adopted_convention(self):
        g = build_network(ring_regions(60), 4, 0.0, seed=1)
        assert hotspot_index(g, np.ones(60, dtype=np.uint8)) == 1.0

    def test_empty_raises(self):
        g = build_network(ring_regions(60), 4, 0.0, seed=1)
        with pytest.raises(EmptyAdopterSet):
            hotspot_index(g, np.zeros(60, dtype=np.uint8))

    def test_shuffled_null_is_centered(self):
        g = build_network(ring_regions(400), 8, 0.1, seed=6)
        m = 40
        gen = np.random.default_rng(13)
        vals = []
        for _ in range(1000):
            adopted = np.zeros(400, dtype=np.uint8)
            adopted[gen.choice(400, m, replace=False)] = 1
            vals.append(hotspot_index(g, adopted))
        assert abs(float(np.mean(vals))) <= 0.02

    def test_ring_segment_is_clustered(self):
        n, k = 500, 8
        g = build_network(ring_regions(n), k, 0.0, seed=1)
        adopted = np.zeros(n, dtype=np.uint8)
        adopted[:50] = 1
        # closed-form ring counts: a contiguous block of m adopters with k/2
        # neighbors per side has m*k/2 - sum_{j<k/2} j internal edges, and
        # k/2*(k/2+1) boundary edges into the block
        half = k // 2
        internal = 50 * half - half * (half + 1) // 2
        boundary = half * (half + 1)
        both, either = adopter_edge_counts(g, adopted)
        assert both == internal
        assert either == internal + boundary
        p_both = 50 * 49 / (n * (n - 1))
        p_either = 1 - (450 * 449) / (n * (n - 1))
        expected = p_both / p_either
        oracle = (internal / (internal + boundary) - expected) / (1 - expected)
        assert hotspot_index(g, adopted) == pytest.approx(oracle, abs=1e-12)
        assert hotspot_index(g, adopted) > 0.5

    def test_network_irrelevant_when_peer_coeff_zero(self):
        counts = []
        for p in (0.0, 0.3, 1.0):
            _, adopted = run_diffusion_experiment(
                n=600, degree_k=6, rewire_p=p, params=params(base=-2.0, peer=0.0),
                price=10.0, income=20.0, cluster_frac=0.01, quarters=20, seed=21)
            counts.append(int(adopted.sum()))
        assert counts[0] == counts[1] == counts[2]
