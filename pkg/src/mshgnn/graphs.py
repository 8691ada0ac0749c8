"""Graph containers, featurization, and batching.

A Graph stores a directed edge list; undirected inputs are expanded to both
directions at construction. Batching builds the disjoint union with
offset-shifted edges plus a node-to-graph ownership map, which is what the
vectorized message passing layers consume.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GraphDataError(ValueError):
    """Structurally invalid graph input (bad endpoints, ragged files, ...)."""


@dataclass
class Graph:
    num_nodes: int
    edges: np.ndarray  # (E, 2) int64 directed (src, dst) pairs
    features: np.ndarray | None = None  # (num_nodes, d) float64
    graph_label: int | None = None
    node_labels: np.ndarray | None = None

    def __post_init__(self):
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        if self.edges.size and (self.edges.min() < 0 or self.edges.max() >= self.num_nodes):
            raise GraphDataError(
                f"edge endpoint out of range for {self.num_nodes} nodes: "
                f"{self.edges[(self.edges >= self.num_nodes).any(axis=1) | (self.edges < 0).any(axis=1)][0].tolist()}")
        if self.features is not None:
            self.features = np.asarray(self.features, dtype=np.float64)
            if self.features.ndim == 1:
                self.features = self.features[:, None]
            if self.features.shape[0] != self.num_nodes:
                raise GraphDataError(
                    f"feature rows ({self.features.shape[0]}) != num_nodes ({self.num_nodes})")
        if self.node_labels is not None:
            self.node_labels = np.asarray(self.node_labels, dtype=np.int64)
            if self.node_labels.shape != (self.num_nodes,):
                raise GraphDataError("node_labels length != num_nodes")

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def src(self) -> np.ndarray:
        return self.edges[:, 0]

    @property
    def dst(self) -> np.ndarray:
        return self.edges[:, 1]

    def in_degrees(self) -> np.ndarray:
        return np.bincount(self.dst, minlength=self.num_nodes)

    def feature_dim(self) -> int:
        if self.features is None:
            raise GraphDataError("graph has no features")
        return int(self.features.shape[1])

    def undirected_pairs(self) -> set[tuple[int, int]]:
        """Edge set as unordered endpoint pairs."""
        return {(min(s, d), max(s, d)) for s, d in self.edges.tolist()}


def _sorted_edges(edges) -> np.ndarray:
    arr = np.asarray(sorted(map(tuple, edges)), dtype=np.int64).reshape(-1, 2)
    return arr


def from_undirected_edges(num_nodes: int, pairs, features=None) -> Graph:
    """Build a Graph from undirected pairs, expanded to both directions.

    Edge order is deterministic: sorted by (src, dst). Duplicate pairs and
    self pairs are rejected.
    """
    seen = set()
    directed = []
    for u, v in pairs:
        u, v = int(u), int(v)
        if not (0 <= u < num_nodes and 0 <= v < num_nodes):
            raise GraphDataError(f"edge endpoint ({u}, {v}) out of range for {num_nodes} nodes")
        if u == v:
            raise GraphDataError(f"self pair ({u}, {v}) not allowed in undirected input")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphDataError(f"duplicate undirected pair {key}")
        seen.add(key)
        directed.append((u, v))
        directed.append((v, u))
    edges = _sorted_edges(directed) if directed else np.zeros((0, 2), dtype=np.int64)
    return Graph(num_nodes=num_nodes, edges=edges, features=features)


def degree_one_hot(graph: Graph, max_degree: int) -> Graph:
    """Replace features with a one-hot encoding of each node's in-degree."""
    degrees = graph.in_degrees()
    if degrees.size and degrees.max() > max_degree:
        offender = int(np.argmax(degrees > max_degree))
        raise GraphDataError(
            f"node {offender} has degree {int(degrees[offender])} > max_degree {max_degree}")
    feats = np.zeros((graph.num_nodes, max_degree + 1))
    feats[np.arange(graph.num_nodes), degrees] = 1.0
    return Graph(num_nodes=graph.num_nodes, edges=graph.edges.copy(), features=feats,
                 graph_label=graph.graph_label, node_labels=graph.node_labels)


def permute_nodes(graph: Graph, permutation) -> Graph:
    """Relabel nodes by a bijection; the result is isomorphic by construction."""
    perm = np.asarray(permutation, dtype=np.int64)
    if sorted(perm.tolist()) != list(range(graph.num_nodes)):
        raise GraphDataError("permutation is not a bijection on node indices")
    edges = _sorted_edges(np.stack([perm[graph.src], perm[graph.dst]], axis=1)) \
        if graph.num_edges else graph.edges.copy()
    features = None
    if graph.features is not None:
        features = np.empty_like(graph.features)
        features[perm] = graph.features
    node_labels = None
    if graph.node_labels is not None:
        node_labels = np.empty_like(graph.node_labels)
        node_labels[perm] = graph.node_labels
    return Graph(num_nodes=graph.num_nodes, edges=edges, features=features,
                 graph_label=graph.graph_label, node_labels=node_labels)


@dataclass
class GraphBatch:
    """Disjoint union of graphs with per-node graph ownership."""

    num_nodes: int
    num_graphs: int
    edges: np.ndarray  # (E, 2) offset-shifted
    features: np.ndarray  # (num_nodes, d)
    graph_of_node: np.ndarray  # (num_nodes,)
    labels: np.ndarray | None = None
    node_offsets: np.ndarray = field(default=None)

    @property
    def src(self) -> np.ndarray:
        return self.edges[:, 0]

    @property
    def dst(self) -> np.ndarray:
        return self.edges[:, 1]


def batch(graphs) -> GraphBatch:
    """Merge graphs into one disjoint union, preserving concatenation order."""
    graphs = list(graphs)
    if not graphs:
        raise GraphDataError("cannot batch an empty list of graphs")
    dims = {g.feature_dim() for g in graphs}
    if len(dims) != 1:
        raise GraphDataError(f"feature dimensions differ across graphs: {sorted(dims)}")
    offsets = np.cumsum([0] + [g.num_nodes for g in graphs])
    edges = [g.edges + offsets[i] for i, g in enumerate(graphs) if g.num_edges]
    ownership = np.concatenate([np.full(g.num_nodes, i, dtype=np.int64)
                                for i, g in enumerate(graphs)])
    labels = None
    if all(g.graph_label is not None for g in graphs):
        labels = np.array([g.graph_label for g in graphs], dtype=np.int64)
    return GraphBatch(
        num_nodes=int(offsets[-1]),
        num_graphs=len(graphs),
        edges=np.concatenate(edges, axis=0) if edges else np.zeros((0, 2), dtype=np.int64),
        features=np.concatenate([g.features for g in graphs], axis=0),
        graph_of_node=ownership,
        labels=labels,
        node_offsets=offsets,
    )
