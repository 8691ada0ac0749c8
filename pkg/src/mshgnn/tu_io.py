"""Reader and writer for the TU graph-classification text format.

Layout of a dataset NAME inside a directory:

    NAME_A.txt                directed edges as 1-based "i, j" pairs
    NAME_graph_indicator.txt  1-based graph id of each node, one per line
    NAME_graph_labels.txt     one class label per graph
    NAME_node_labels.txt      optional, one integer label per node
    NAME_node_attributes.txt  optional, comma-separated reals per node

Records are one per line; LF or CRLF line ends and surrounding whitespace
are accepted. Loaded graphs use 0-based ids, class labels remapped to a
dense 0-based range. Features come from node attributes when present, else
one-hot node labels, else one-hot degrees (max degree taken over the whole
dataset so dimensions agree across splits).
"""

from __future__ import annotations

import os

import numpy as np

from .graphs import Graph, GraphDataError, degree_one_hot


def _read_lines(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        return [line.strip() for line in handle.read().splitlines() if line.strip()]


def _require(path: str):
    if not os.path.isfile(path):
        raise GraphDataError(f"missing mandatory file: {path}")
    return path


def load_tu_dataset(directory: str, name: str):
    """Parse a TU-format dataset into a list of labeled Graphs."""
    prefix = os.path.join(directory, name)
    indicator = np.array([int(s) for s in _read_lines(_require(f"{prefix}_graph_indicator.txt"))],
                         dtype=np.int64)
    raw_graph_labels = [int(s) for s in _read_lines(_require(f"{prefix}_graph_labels.txt"))]
    edge_lines = _read_lines(_require(f"{prefix}_A.txt"))

    num_graphs = len(raw_graph_labels)
    if indicator.min() < 1 or indicator.max() > num_graphs:
        raise GraphDataError("graph_indicator references a graph id outside the label file")

    label_map = {lab: i for i, lab in enumerate(sorted(set(raw_graph_labels)))}
    graph_labels = [label_map[lab] for lab in raw_graph_labels]

    node_of_graph = [np.flatnonzero(indicator == gid + 1) for gid in range(num_graphs)]
    # nodes of one graph must be a contiguous 1-based block for local ids to work
    first = np.zeros(num_graphs, dtype=np.int64)
    counts = np.zeros(num_graphs, dtype=np.int64)
    for gid, nodes in enumerate(node_of_graph):
        if nodes.size == 0:
            raise GraphDataError(f"graph {gid} has no nodes")
        if nodes.max() - nodes.min() + 1 != nodes.size:
            raise GraphDataError(f"graph {gid} nodes are not contiguous in graph_indicator")
        first[gid] = nodes.min()
        counts[gid] = nodes.size

    edges_per_graph = [[] for _ in range(num_graphs)]
    for line in edge_lines:
        a, b = (int(tok) for tok in line.replace(",", " ").split())
        ga, gb = int(indicator[a - 1]) - 1, int(indicator[b - 1]) - 1
        if ga != gb:
            raise GraphDataError(f"edge ({a}, {b}) crosses graphs {ga} and {gb}")
        edges_per_graph[ga].append((a - 1 - first[ga], b - 1 - first[ga]))

    node_labels = None
    labels_path = f"{prefix}_node_labels.txt"
    if os.path.isfile(labels_path):
        raw = [int(s) for s in _read_lines(labels_path)]
        if len(raw) != indicator.size:
            raise GraphDataError(
                f"node_labels has {len(raw)} entries for {indicator.size} nodes")
        values = sorted(set(raw))
        remap = {v: i for i, v in enumerate(values)}
        node_labels = np.array([remap[v] for v in raw], dtype=np.int64)

    attributes = None
    attr_path = f"{prefix}_node_attributes.txt"
    if os.path.isfile(attr_path):
        rows = [[float(tok) for tok in line.replace(",", " ").split()]
                for line in _read_lines(attr_path)]
        if len(rows) != indicator.size:
            raise GraphDataError(
                f"node_attributes has {len(rows)} entries for {indicator.size} nodes")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise GraphDataError("ragged node_attributes rows")
        attributes = np.array(rows, dtype=np.float64)

    graphs = []
    for gid in range(num_graphs):
        n = int(counts[gid])
        edges = np.asarray(sorted(edges_per_graph[gid]), dtype=np.int64).reshape(-1, 2)
        lo, hi = int(first[gid]), int(first[gid] + n)
        graphs.append(Graph(
            num_nodes=n,
            edges=edges,
            features=attributes[lo:hi] if attributes is not None else None,
            graph_label=graph_labels[gid],
            node_labels=node_labels[lo:hi] if node_labels is not None else None,
        ))

    if attributes is None:
        if node_labels is not None:
            width = int(node_labels.max()) + 1
            for g in graphs:
                feats = np.zeros((g.num_nodes, width))
                feats[np.arange(g.num_nodes), g.node_labels] = 1.0
                g.features = feats
        else:
            max_degree = max(int(g.in_degrees().max(initial=0)) for g in graphs)
            graphs = [degree_one_hot(g, max_degree) for g in graphs]
    return graphs


def write_tu_dataset(graphs, directory: str, name: str,
                     write_attributes: bool | None = None) -> None:
    """Write graphs in the TU text format; inverse of load_tu_dataset."""
    os.makedirs(directory, exist_ok=True)
    prefix = os.path.join(directory, name)
    if write_attributes is None:
        write_attributes = all(g.features is not None for g in graphs)

    offset = 0
    a_lines, indicator_lines, label_lines = [], [], []
    attr_lines, node_label_lines = [], []
    have_node_labels = all(g.node_labels is not None for g in graphs)
    for gid, g in enumerate(graphs):
        if g.graph_label is None:
            raise GraphDataError(f"graph {gid} has no label to export")
        label_lines.append(str(int(g.graph_label)))
        indicator_lines.extend([str(gid + 1)] * g.num_nodes)
        for s, d in g.edges.tolist():
            a_lines.append(f"{s + 1 + offset}, {d + 1 + offset}")
        if write_attributes:
            for row in g.features:
                attr_lines.append(", ".join(f"{x:.17g}" for x in np.atleast_1d(row)))
        if have_node_labels:
            node_label_lines.extend(str(int(v)) for v in g.node_labels)
        offset += g.num_nodes

    def dump(path, lines):
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")

    dump(f"{prefix}_A.txt", a_lines)
    dump(f"{prefix}_graph_indicator.txt", indicator_lines)
    dump(f"{prefix}_graph_labels.txt", label_lines)
    if write_attributes:
        dump(f"{prefix}_node_attributes.txt", attr_lines)
    if have_node_labels:
        dump(f"{prefix}_node_labels.txt", node_label_lines)
