import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from joinspace.groups import FreeProduct
from joinspace.hypgraph import (
    CayleyBall,
    GraphError,
    build_graph,
    cayley_ball,
    cycle_graph,
    delta_fine,
    delta_fine_bruteforce,
    from_edges,
    parse_edge_list,
    path_graph,
    random_tree,
    ray_to,
    tripod,
    write_edge_list,
)


class TestBuilders:
    def test_path_edges(self):
        g = path_graph(11)
        assert len(g) == 11 and len(g.edges()) == 10

    def test_tripod_size(self):
        g = tripod(3)
        assert len(g) == 10 and g.is_tree()
        assert g.dist(3, 6) == 6

    def test_edge_list_roundtrip(self):
        g = random_tree(15, 4)
        h = build_graph(write_edge_list(g))
        assert sorted(map(sorted, h.edges())) == sorted(map(sorted, g.edges()))

    def test_parse_errors(self):
        with pytest.raises(GraphError):
            parse_edge_list("0 1 2")
        with pytest.raises(GraphError):
            parse_edge_list("a b")
        with pytest.raises(GraphError):
            from_edges([(0, 1), (2, 3)])

    @settings(max_examples=25, deadline=None)
    @given(st.integers(2, 40), st.integers(0, 10**6))
    def test_distances_match_networkx(self, n, seed):
        g = random_tree(n, seed)
        G = g.to_networkx()
        ref = dict(nx.all_pairs_shortest_path_length(G))
        for u in g.points[:5]:
            for v in g.points:
                assert g.dist(u, v) == ref[u][v]


class TestCayley:
    @pytest.mark.parametrize("r", [1, 2, 3, 4])
    def test_free_ball_count(self, r):
        # reduced words in F2: 1 + 4 (3^r - 1) / 2
        assert len(cayley_ball("f2", r)) == 1 + 2 * (3**r - 1)

    def test_word_metric_matches_bfs(self):
        g = cayley_ball("z2*z3", 4)
        G = g.to_networkx()
        ref = nx.single_source_shortest_path_length(G, "e")
        for v in g.points:
            assert g.dist("e", v) == ref[v]

    def test_free_product_arithmetic(self):
        G = FreeProduct((0, 0))
        w = G.parse("abA")
        assert G.to_word(G.mul(w, G.inv(w))) == "e"
        assert G.length(w) == 3

    def test_triangle_ball_is_connected(self):
        g = cayley_ball("triangle 3 3 4", 4)
        assert nx.is_connected(g.to_networkx())


class TestDelta:
    def test_trees_are_zero(self):
        assert delta_fine(tripod(3)) == 0.0

    @pytest.mark.parametrize("n", [5, 6, 8])
    def test_cycle_matches_bruteforce(self, n):
        g = cycle_graph(n)
        assert delta_fine(g) == delta_fine_bruteforce(g)

    def test_grid_matches_bruteforce(self):
        G = nx.grid_2d_graph(3, 3)
        g = from_edges([(3 * a + b, 3 * c + d) for (a, b), (c, d) in G.edges()])
        assert delta_fine(g) == delta_fine_bruteforce(g)


class TestRays:
    def test_ray_is_geodesic(self):
        g = cayley_ball("f2", 5)
        ray = ray_to(g, "abab")
        assert ray.depth == 4
        for i in range(ray.depth + 1):
            assert g.dist("e", ray.at(i)) == i
