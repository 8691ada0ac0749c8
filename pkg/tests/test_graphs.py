import numpy as np
import pytest

from mshgnn.graphs import (Graph, GraphDataError, batch, degree_one_hot,
                           from_undirected_edges, permute_nodes)


class TestFromUndirected:
    def test_triangle_gives_six_directed_edges(self):
        g = from_undirected_edges(3, [(0, 1), (1, 2), (0, 2)])
        assert g.num_edges == 6
        assert g.edges.tolist() == [[0, 1], [0, 2], [1, 0], [1, 2], [2, 0], [2, 1]]

    def test_single_edge_expands_both_ways(self):
        g = from_undirected_edges(2, [(0, 1)])
        assert g.edges.tolist() == [[0, 1], [1, 0]]

    def test_empty_edge_set_gives_isolated_nodes(self):
        g = from_undirected_edges(4, [])
        assert g.num_edges == 0 and g.num_nodes == 4

    def test_duplicate_pair_rejected(self):
        with pytest.raises(GraphDataError, match="duplicate"):
            from_undirected_edges(3, [(0, 1), (1, 0)])

    def test_endpoint_out_of_range(self):
        with pytest.raises(GraphDataError, match="out of range"):
            from_undirected_edges(3, [(0, 3)])

    def test_self_pair_rejected(self):
        with pytest.raises(GraphDataError, match="self pair"):
            from_undirected_edges(3, [(1, 1)])


class TestDegreeOneHot:
    def test_star_center(self):
        g = from_undirected_edges(4, [(0, 1), (0, 2), (0, 3)])
        g = degree_one_hot(g, 3)
        assert g.features[0].tolist() == [0.0, 0.0, 0.0, 1.0]
        assert g.features[1].tolist() == [0.0, 1.0, 0.0, 0.0]

    def test_isolated_node(self):
        g = degree_one_hot(from_undirected_edges(2, []), 1)
        assert g.features[0].tolist() == [1.0, 0.0]

    def test_ring_rows_identical(self):
        n = 7
        g = from_undirected_edges(n, [(i, (i + 1) % n) for i in range(n)])
        g = degree_one_hot(g, 2)
        assert np.all(g.features == g.features[0])
        assert g.features[0].tolist() == [0.0, 0.0, 1.0]

    def test_exceeding_degree_names_node(self):
        g = from_undirected_edges(4, [(0, 1), (0, 2), (0, 3)])
        with pytest.raises(GraphDataError, match="node 0"):
            degree_one_hot(g, 2)


class TestBatch:
    def test_two_k2(self):
        k2 = from_undirected_edges(2, [(0, 1)], features=np.ones((2, 1)))
        merged = batch([k2, k2])
        assert merged.num_nodes == 4
        assert merged.edges.tolist() == [[0, 1], [1, 0], [2, 3], [3, 2]]
        assert merged.graph_of_node.tolist() == [0, 0, 1, 1]

    def test_single_graph_identity(self):
        g = from_undirected_edges(3, [(0, 1)], features=np.eye(3))
        merged = batch([g])
        assert merged.num_nodes == 3
        assert np.array_equal(merged.features, g.features)
        assert np.array_equal(merged.edges, g.edges)

    def test_empty_list_rejected(self):
        with pytest.raises(GraphDataError, match="empty"):
            batch([])

    def test_feature_dim_mismatch(self):
        a = from_undirected_edges(2, [(0, 1)], features=np.ones((2, 1)))
        b = from_undirected_edges(2, [(0, 1)], features=np.ones((2, 2)))
        with pytest.raises(GraphDataError, match="differ"):
            batch([a, b])

    def test_edges_never_cross_graphs(self):
        a = from_undirected_edges(3, [(0, 1), (1, 2)], features=np.ones((3, 1)))
        b = from_undirected_edges(2, [(0, 1)], features=np.ones((2, 1)))
        merged = batch([a, b])
        for s, d in merged.edges.tolist():
            assert merged.graph_of_node[s] == merged.graph_of_node[d]


class TestPermuteNodes:
    def test_identity(self):
        g = from_undirected_edges(3, [(0, 1), (1, 2)], features=np.arange(3.0))
        p = permute_nodes(g, [0, 1, 2])
        assert np.array_equal(p.edges, g.edges)
        assert np.array_equal(p.features, g.features)

    def test_involution_round_trips(self):
        g = from_undirected_edges(4, [(0, 1), (2, 3)], features=np.arange(4.0))
        swap = [1, 0, 3, 2]
        back = permute_nodes(permute_nodes(g, swap), swap)
        assert np.array_equal(back.edges, g.edges)
        assert np.array_equal(back.features, g.features)

    def test_triangle_rotation_preserves_edge_multiset(self):
        g = from_undirected_edges(3, [(0, 1), (1, 2), (0, 2)])
        rotated = permute_nodes(g, [1, 2, 0])
        assert sorted(map(tuple, rotated.edges.tolist())) == sorted(map(tuple, g.edges.tolist()))

    def test_non_bijection_rejected(self):
        g = from_undirected_edges(3, [(0, 1)])
        with pytest.raises(GraphDataError, match="bijection"):
            permute_nodes(g, [0, 0, 2])
