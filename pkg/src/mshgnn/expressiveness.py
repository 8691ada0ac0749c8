"""Color refinement oracle and model discrimination checks.

The refinement oracle canonicalizes colors through a collision-free
interning table (colors are compared structurally, and dense ids are
assigned in sorted-key order), so histograms are permutation invariant and
directly comparable when two graphs are refined jointly.

The discrimination checks pit randomly initialized models against graph
pairs: an upper-bound check on refinement-equivalent pairs, and a star
pair whose neighbor features share their mean but not their multiset,
which separates feature-wise projection from plain attention averaging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import layers
from .graphs import Graph, from_undirected_edges
from .models import GatClassifier, MshGnnClassifier
from .rng import make_rng
from .tensor import Tensor


@dataclass(frozen=True)
class ColorHistogram:
    """Stable refinement colors of one graph: sorted (color id, count) pairs."""

    colors: tuple[tuple[int, int], ...]
    rounds: int

    def __eq__(self, other):
        return isinstance(other, ColorHistogram) and self.colors == other.colors


def _initial_colors(graph: Graph, initial=None):
    if initial is not None:
        return [tuple([c]) for c in initial]
    if graph.features is None:
        return [(0,) for _ in range(graph.num_nodes)]
    return [tuple(row) for row in graph.features.tolist()]


def _intern(keys):
    """Dense ids for structural keys, assigned in sorted-key order."""
    table = {key: i for i, key in enumerate(sorted(set(keys)))}
    return [table[key] for key in keys]


def _refine_jointly(graphs, initials, max_rounds=None):
    """Run refinement on several graphs with one shared color table."""
    sizes = [g.num_nodes for g in graphs]
    neighbors = []
    for g in graphs:
        adj = [[] for _ in range(g.num_nodes)]
        for s, d in g.edges.tolist():
            adj[d].append(s)  # color of a node refines over in-neighbors
        neighbors.append(adj)

    keys = []
    for g, init in zip(graphs, initials):
        keys.extend(_initial_colors(g, init))
    colors = _intern(keys)
    bound = max_rounds if max_rounds is not None else sum(sizes)

    rounds = 0
    for _ in range(bound):
        offsets = np.cumsum([0] + sizes)
        new_keys = []
        for gi in range(len(graphs)):
            base = offsets[gi]
            for v in range(sizes[gi]):
                neigh = sorted(colors[base + u] for u in neighbors[gi][v])
                new_keys.append((colors[base + v], tuple(neigh)))
        new_colors = _intern(new_keys)
        rounds += 1
        if len(set(new_colors)) == len(set(colors)):
            colors = new_colors
            break
        colors = new_colors

    histograms = []
    offsets = np.cumsum([0] + sizes)
    for gi in range(len(graphs)):
        block = colors[offsets[gi]:offsets[gi + 1]]
        counts = {}
        for c in block:
            counts[c] = counts.get(c, 0) + 1
        histograms.append(ColorHistogram(colors=tuple(sorted(counts.items())), rounds=rounds))
    return histograms


def wl_refine(graph: Graph, initial_colors=None, max_rounds=None) -> ColorHistogram:
    """Refine one graph to its stable color histogram."""
    return _refine_jointly([graph], [initial_colors], max_rounds)[0]


def wl_equivalent(g1: Graph, g2: Graph, initial_colors=(None, None)) -> bool:
    """True iff the stable histograms agree under a shared color naming."""
    h1, h2 = _refine_jointly([g1, g2], list(initial_colors))
    return h1 == h2


def star_mean_collision_pair():
    """Two 4-node stars: equal neighbor feature mean, different multisets.

    Center feature is [0, 0]; both neighbor sets average to [2/3, 2/3].
    Attention models that aggregate whole neighbor embeddings with equal
    weights cannot tell them apart; feature-wise projection can.
    """
    edges = [(0, 1), (0, 2), (0, 3)]
    g1 = from_undirected_edges(4, edges, features=np.array(
        [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
    g2 = from_undirected_edges(4, edges, features=np.array(
        [[0.0, 0.0], [1.0, 1.0], [1.0, 1.0], [0.0, 0.0]]))
    return g1, g2


def msh_embedding(graph: Graph, seed: int, hidden: int = 8, projection_dim: int = 4,
                  layers_count: int = 2) -> np.ndarray:
    """Graph embedding from a randomly initialized harmonic model."""
    est = MshGnnClassifier(layers=layers_count, hidden=hidden, head=4,
                           projection_dim=projection_dim, dropout=0.0, seed=seed,
                           num_classes=2)
    est.init_params(graph.feature_dim(), 2)
    return est.transform([graph])[0]


def gat_zero_attention_embedding(graph: Graph, seed: int, hidden: int = 8,
                                 layers_count: int = 2) -> np.ndarray:
    """GAT embedding with the attention vector forced to zero.

    Zero attention makes every softmax uniform regardless of features,
    which turns 'tends to produce identical aggregations' into an exact,
    assertable statement.
    """
    est = GatClassifier(layers=layers_count, hidden=hidden, head=4, dropout=0.0,
                        seed=seed, num_classes=2)
    est.init_params(graph.feature_dim(), 2)
    for i in range(layers_count):
        est.store_[f"layer{i}.attention"].data[:] = 0.0
    return est.transform([graph])[0]


def discrimination_test(embed_fn, g1: Graph, g2: Graph, num_seeds: int = 20,
                        expect: str = "distinct"):
    """Embedding distances across random initializations, plus a verdict.

    'distinct' passes when the distance exceeds 1e-6 in at least 90% of
    seeds; 'identical' passes when it stays below 1e-9 in every seed.
    """
    if num_seeds < 1:
        raise ValueError("num_seeds must be >= 1")
    distances = [float(np.linalg.norm(embed_fn(g1, seed) - embed_fn(g2, seed)))
                 for seed in range(num_seeds)]
    if expect == "distinct":
        passed = sum(d > 1e-6 for d in distances) >= int(np.ceil(0.9 * num_seeds))
    elif expect == "identical":
        passed = all(d < 1e-9 for d in distances)
    else:
        raise ValueError(f"unknown expectation '{expect}'")
    return distances, passed


def wl_upper_bound_check(embed_fn, pairs, tolerance: float = 1e-7, num_seeds: int = 3) -> bool:
    """Embeddings must agree on refinement-equivalent pairs.

    Pairs that are not refinement-equivalent (with their given features)
    violate the precondition and are reported instead of silently checked.
    """
    for i, (g1, g2) in enumerate(pairs):
        if not wl_equivalent(g1, g2):
            raise ValueError(f"pair {i} is not refinement-equivalent; precondition violated")
        for seed in range(num_seeds):
            gap = float(np.linalg.norm(embed_fn(g1, seed) - embed_fn(g2, seed)))
            if gap > tolerance:
                return False
    return True


def kernel_identity_check(spec: layers.HarmonicSpec, trials: int,
                          rng: np.random.Generator, projection_dim: int = 16) -> float:
    """Largest deviation from the cosine-sum identity over random draws.

    For encodings psi at frequencies w_k, dot(psi(p), psi(p')) must equal
    sum over (k, j) of cos(w_k (p_j - p'_j)), and must be unchanged when
    both arguments are shifted by the same phase c.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    worst = 0.0
    freqs = np.array(spec.frequencies)
    for _ in range(trials):
        p = rng.uniform(-3.0, 3.0, size=projection_dim)
        q = rng.uniform(-3.0, 3.0, size=projection_dim)
        c = rng.uniform(-3.0, 3.0, size=projection_dim)
        psi_p = layers.harmonic_encode(Tensor(p[None, :]), spec).data[0]
        psi_q = layers.harmonic_encode(Tensor(q[None, :]), spec).data[0]
        psi_pc = layers.harmonic_encode(Tensor((p + c)[None, :]), spec).data[0]
        psi_qc = layers.harmonic_encode(Tensor((q + c)[None, :]), spec).data[0]
        expected = float(np.cos(freqs[:, None] * (p - q)[None, :]).sum())
        worst = max(worst,
                    abs(float(psi_p @ psi_q) - expected),
                    abs(float(psi_pc @ psi_qc) - expected))
    return worst


def two_triangles_and_hexagon():
    """The classic refinement-equivalent pair: 2 disjoint triangles vs C6."""
    g1 = from_undirected_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)],
                               features=np.ones((6, 1)))
    g2 = from_undirected_edges(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)],
                               features=np.ones((6, 1)))
    return g1, g2


def run_suite(num_seeds: int = 20, kernel_trials: int = 1000, seed: int = 0) -> dict:
    """Full expressiveness report consumed by the CLI and the acceptance gate."""
    g1, g2 = two_triangles_and_hexagon()
    s1, s2 = star_mean_collision_pair()

    msh_dist, msh_pass = discrimination_test(msh_embedding, s1, s2, num_seeds, "distinct")
    gat_dist, gat_pass = discrimination_test(gat_zero_attention_embedding, s1, s2,
                                             num_seeds, "identical")
    upper_bound = wl_upper_bound_check(msh_embedding, [(g1, g2)])

    kernel_errors = {}
    for mode in ("single", "linear", "exponential"):
        spec = layers.HarmonicSpec.make(mode)
        kernel_errors[mode] = kernel_identity_check(
            spec, kernel_trials, make_rng(seed, stream=400), projection_dim=16)

    return {
        "wl_pair_equivalent": wl_equivalent(g1, g2),
        "wl_triangle_vs_path_equivalent": wl_equivalent(
            from_undirected_edges(3, [(0, 1), (1, 2), (0, 2)], features=np.ones((3, 1))),
            from_undirected_edges(3, [(0, 1), (1, 2)], features=np.ones((3, 1)))),
        "upper_bound_holds": bool(upper_bound),
        "star_pair_msh_distances": msh_dist,
        "star_pair_msh_separates": bool(msh_pass),
        "star_pair_gat_distances": gat_dist,
        "star_pair_gat_collapses": bool(gat_pass),
        "kernel_identity_max_error": kernel_errors,
        "num_seeds": num_seeds,
        "kernel_trials": kernel_trials,
    }
