import numpy as np
import pytest

from mshgnn.expressiveness import (discrimination_test,
                                   gat_zero_attention_embedding,
                                   kernel_identity_check, msh_embedding,
                                   star_mean_collision_pair,
                                   two_triangles_and_hexagon, wl_equivalent,
                                   wl_refine, wl_upper_bound_check)
from mshgnn.graphs import from_undirected_edges, permute_nodes
from mshgnn.layers import HarmonicSpec
from mshgnn.rng import make_rng


def c6():
    return from_undirected_edges(6, [(i, (i + 1) % 6) for i in range(6)],
                                 features=np.ones((6, 1)))


def p3():
    return from_undirected_edges(3, [(0, 1), (1, 2)], features=np.ones((3, 1)))


def c3():
    return from_undirected_edges(3, [(0, 1), (1, 2), (0, 2)], features=np.ones((3, 1)))


class TestRefinement:
    def test_cycle_has_single_color_class(self):
        hist = wl_refine(c6())
        assert len(hist.colors) == 1
        assert hist.colors[0][1] == 6

    def test_path_splits_ends_from_middle(self):
        hist = wl_refine(p3())
        assert len(hist.colors) == 2
        assert sorted(count for _, count in hist.colors) == [1, 2]

    def test_two_triangles_equivalent_to_hexagon(self):
        g1, g2 = two_triangles_and_hexagon()
        assert wl_equivalent(g1, g2)

    def test_triangle_not_equivalent_to_path(self):
        assert not wl_equivalent(c3(), p3())

    def test_permuted_graph_equivalent_to_itself(self):
        g = from_undirected_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (0, 3)],
                                  features=np.ones((5, 1)))
        assert wl_equivalent(g, permute_nodes(g, [4, 0, 2, 1, 3]))

    def test_histogram_permutation_invariant(self):
        g = from_undirected_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 2)],
                                  features=np.ones((6, 1)))
        h1 = wl_refine(g)
        h2 = wl_refine(permute_nodes(g, [5, 3, 1, 0, 4, 2]))
        assert h1 == h2

    def test_initial_colors_from_features_matter(self):
        plain = c6()
        marked = c6()
        marked.features = np.ones((6, 1))
        marked.features[0, 0] = 2.0
        assert not wl_equivalent(plain, marked)

    def test_refinement_reaches_fixed_point(self):
        hist = wl_refine(p3())
        again = wl_refine(p3(), max_rounds=hist.rounds + 1)
        assert hist == again


class TestStarPair:
    def test_means_are_exactly_two_thirds(self):
        g1, g2 = star_mean_collision_pair()
        for g in (g1, g2):
            assert np.allclose(g.features[1:].mean(axis=0), [2.0 / 3.0, 2.0 / 3.0])

    def test_multisets_differ(self):
        g1, g2 = star_mean_collision_pair()
        m1 = sorted(map(tuple, g1.features[1:].tolist()))
        m2 = sorted(map(tuple, g2.features[1:].tolist()))
        assert m1 != m2

    def test_isomorphic_as_unlabeled_graphs(self):
        g1, g2 = star_mean_collision_pair()
        assert sorted(map(tuple, g1.edges.tolist())) == sorted(map(tuple, g2.edges.tolist()))


class TestDiscrimination:
    def test_msh_separates_star_pair(self):
        g1, g2 = star_mean_collision_pair()
        distances, passed = discrimination_test(msh_embedding, g1, g2, num_seeds=20)
        assert passed
        assert sum(d > 1e-6 for d in distances) >= 18

    def test_zero_attention_gat_collapses_star_pair(self):
        g1, g2 = star_mean_collision_pair()
        distances, passed = discrimination_test(gat_zero_attention_embedding, g1, g2,
                                                num_seeds=20, expect="identical")
        assert passed
        assert all(d < 1e-9 for d in distances)

    def test_identical_graphs_give_zero_distance(self):
        g1, _ = star_mean_collision_pair()
        distances, _ = discrimination_test(msh_embedding, g1, g1, num_seeds=3)
        assert all(d == 0.0 for d in distances)

    def test_bad_expectation_rejected(self):
        g1, g2 = star_mean_collision_pair()
        with pytest.raises(ValueError, match="expectation"):
            discrimination_test(msh_embedding, g1, g2, num_seeds=1, expect="maybe")


class TestUpperBound:
    def test_embeddings_agree_on_wl_equivalent_pair(self):
        g1, g2 = two_triangles_and_hexagon()
        assert wl_upper_bound_check(msh_embedding, [(g1, g2)], tolerance=1e-7)

    def test_isomorphic_pair_agrees(self):
        g = c6()
        assert wl_upper_bound_check(msh_embedding,
                                    [(g, permute_nodes(g, [3, 1, 5, 0, 4, 2]))])

    def test_non_equivalent_pair_reports_precondition(self):
        with pytest.raises(ValueError, match="precondition"):
            wl_upper_bound_check(msh_embedding, [(c3(), p3())])


class TestKernelIdentityCheck:
    def test_equal_arguments_give_fk(self):
        spec = HarmonicSpec.make("exponential")
        from mshgnn.layers import harmonic_encode
        from mshgnn.tensor import Tensor
        p = np.random.default_rng(0).uniform(-2, 2, (1, 16))
        psi = harmonic_encode(Tensor(p), spec).data[0]
        assert abs(float(psi @ psi) - 16 * 3) < 1e-9

    def test_f1_k1_closed_form(self):
        spec = HarmonicSpec.make("single")
        from mshgnn.layers import harmonic_encode
        from mshgnn.tensor import Tensor
        psi0 = harmonic_encode(Tensor([[0.0]]), spec).data[0]
        psipi = harmonic_encode(Tensor([[np.pi]]), spec).data[0]
        assert abs(float(psi0 @ psipi) - (-1.0)) < 1e-12

    def test_thousand_trials_under_tolerance(self):
        spec = HarmonicSpec.make("exponential")
        err = kernel_identity_check(spec, 1000, make_rng(0), projection_dim=16)
        assert err < 1e-9

    def test_trials_must_be_positive(self):
        with pytest.raises(ValueError, match="trials"):
            kernel_identity_check(HarmonicSpec.make("single"), 0, make_rng(0))
