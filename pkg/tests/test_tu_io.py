import os

import numpy as np
import pytest

from mshgnn.graphs import GraphDataError, from_undirected_edges
from mshgnn.tu_io import load_tu_dataset, write_tu_dataset

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "data", "TOY")
MUTAG_DIR = os.environ.get("MSHGNN_DATA", os.path.join(os.path.dirname(__file__), "..", "data"))


def test_fixture_parses_to_two_graphs():
    graphs = load_tu_dataset(FIXTURE_DIR, "TOY")
    assert len(graphs) == 2
    triangle, path = graphs
    assert triangle.num_nodes == 3 and triangle.num_edges == 6
    assert path.num_nodes == 3 and path.num_edges == 4


def test_fixture_labels_remap_dense():
    graphs = load_tu_dataset(FIXTURE_DIR, "TOY")
    # raw labels {1, -1} remap to {0, 1} preserving multiplicity
    assert sorted(g.graph_label for g in graphs) == [0, 1]
    assert graphs[0].graph_label == 1   # raw 1 -> 1
    assert graphs[1].graph_label == 0   # raw -1 -> 0


def test_fixture_node_labels_become_one_hot_features():
    graphs = load_tu_dataset(FIXTURE_DIR, "TOY")
    assert graphs[0].features.shape == (3, 3)
    assert graphs[0].features[0].tolist() == [1.0, 0.0, 0.0]
    assert graphs[0].features[1].tolist() == [0.0, 1.0, 0.0]
    assert graphs[1].features[0].tolist() == [0.0, 0.0, 1.0]


def test_missing_mandatory_file(tmp_path):
    with pytest.raises(GraphDataError, match="missing mandatory file"):
        load_tu_dataset(str(tmp_path), "NOPE")


def test_cross_graph_edge_rejected(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 3\n3, 1\n")
    (tmp_path / "X_graph_indicator.txt").write_text("1\n1\n2\n2\n")
    (tmp_path / "X_graph_labels.txt").write_text("0\n1\n")
    with pytest.raises(GraphDataError, match="crosses graphs"):
        load_tu_dataset(str(tmp_path), "X")


def test_ragged_node_labels_rejected(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 2\n2, 1\n")
    (tmp_path / "X_graph_indicator.txt").write_text("1\n1\n")
    (tmp_path / "X_graph_labels.txt").write_text("0\n")
    (tmp_path / "X_node_labels.txt").write_text("0\n")
    with pytest.raises(GraphDataError, match="node_labels"):
        load_tu_dataset(str(tmp_path), "X")


def test_crlf_and_whitespace_accepted(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 2\r\n 2 , 1 \r\n")
    (tmp_path / "X_graph_indicator.txt").write_text("1\r\n1\r\n")
    (tmp_path / "X_graph_labels.txt").write_text(" 5 \r\n")
    graphs = load_tu_dataset(str(tmp_path), "X")
    assert len(graphs) == 1 and graphs[0].num_edges == 2


def test_round_trip_structure_and_features(tmp_path):
    original = load_tu_dataset(FIXTURE_DIR, "TOY")
    write_tu_dataset(original, str(tmp_path), "COPY")
    reloaded = load_tu_dataset(str(tmp_path), "COPY")
    assert len(reloaded) == len(original)
    for a, b in zip(original, reloaded):
        assert a.num_nodes == b.num_nodes
        assert np.array_equal(a.edges, b.edges)
        assert a.graph_label == b.graph_label
        assert np.allclose(a.features, b.features)


def test_write_attributes_one_real_per_node(tmp_path):
    g = from_undirected_edges(3, [(0, 1), (1, 2)],
                              features=np.array([[0.25], [0.5], [-0.125]]))
    g.graph_label = 0
    write_tu_dataset([g], str(tmp_path), "SIG")
    lines = (tmp_path / "SIG_node_attributes.txt").read_text().strip().splitlines()
    assert lines == ["0.25", "0.5", "-0.125"]
    reloaded = load_tu_dataset(str(tmp_path), "SIG")
    assert np.array_equal(reloaded[0].features, g.features)


def test_degree_features_when_no_labels_or_attributes(tmp_path):
    (tmp_path / "X_A.txt").write_text("1, 2\n2, 1\n2, 3\n3, 2\n")
    (tmp_path / "X_graph_indicator.txt").write_text("1\n1\n1\n")
    (tmp_path / "X_graph_labels.txt").write_text("0\n")
    graphs = load_tu_dataset(str(tmp_path), "X")
    assert graphs[0].features.shape == (3, 3)  # max degree 2 over the dataset
    assert graphs[0].features[1].tolist() == [0.0, 0.0, 1.0]


@pytest.mark.skipif(not os.path.isdir(os.path.join(MUTAG_DIR, "MUTAG")),
                    reason="MUTAG dataset not present (no network in this environment)")
def test_mutag_has_188_graphs_two_classes():
    graphs = load_tu_dataset(os.path.join(MUTAG_DIR, "MUTAG"), "MUTAG")
    assert len(graphs) == 188
    assert len({g.graph_label for g in graphs}) == 2
