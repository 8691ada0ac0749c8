"""Graph-level readout: attention over edge messages, pooling, fusion.

The attention path scores each edge message, normalizes the scores across
each destination's incoming edges (softmax by default, sigmoid as the
unnormalized variant), pools weighted transformed messages per node, means
them per graph, and fuses the per-layer graph vectors with learnable
scalars. Plain mean/sum/max pooling over final node features is the
ablation path; node-level tasks use an affine head and skip pooling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .optim import ParamStore, glorot_init
from .tensor import Tensor

SIGMA_MODES = ("softmax", "sigmoid")
POOLING_KINDS = ("attention", "mean", "sum", "max")


@dataclass
class ReadoutParams:
    score_weight: Tensor   # (d, 1), edge attention scorer
    value_weight: Tensor   # (d, d), message transform
    fusion: Tensor         # (L,), per-layer combination weights


def init_readout(store: ParamStore, prefix: str, feature_dim: int, num_layers: int,
                 rng: np.random.Generator) -> ReadoutParams:
    return ReadoutParams(
        score_weight=store.add(f"{prefix}.score_weight", glorot_init((feature_dim, 1), rng)),
        value_weight=store.add(f"{prefix}.value_weight", glorot_init((feature_dim, feature_dim), rng)),
        fusion=store.add(f"{prefix}.fusion", np.full(num_layers, 1.0 / num_layers)),
    )


def attention_pool(messages: Tensor, dst, num_nodes: int, params: ReadoutParams,
                   sigma_mode: str = "softmax") -> Tensor:
    """Per-node weighted sum of transformed incoming edge messages.

    Nodes with no incoming edges get a zero row.
    """
    if sigma_mode not in SIGMA_MODES:
        raise ValueError(f"unknown sigma mode '{sigma_mode}'")
    scores = T.reshape(T.matmul(messages, params.score_weight), (-1,))
    if sigma_mode == "softmax":
        alpha = T.segment_softmax(scores, dst, num_nodes)
    else:
        alpha = T.sigmoid(scores)
    weighted = T.mul(T.reshape(alpha, (-1, 1)), T.matmul(messages, params.value_weight))
    return T.segment_sum(weighted, dst, num_nodes)


def graph_embed(node_values: Tensor, graph_of_node, num_graphs: int) -> Tensor:
    """Mean over each graph's own nodes (divisor is that graph's node count)."""
    return T.segment_mean(node_values, graph_of_node, num_graphs)


def fuse_layers(per_layer, fusion: Tensor) -> Tensor:
    """Weighted sum of per-layer graph embeddings with learnable scalars."""
    per_layer = list(per_layer)
    if fusion.data.shape != (len(per_layer),):
        raise ValueError(
            f"fusion weights {fusion.data.shape} do not match {len(per_layer)} layers")
    total = None
    for l, embedding in enumerate(per_layer):
        w_l = T.reshape(T.take_rows(fusion, [l]), (1, 1))
        term = T.mul(embedding, w_l)
        total = term if total is None else T.add(total, term)
    return total


def simple_pool(node_features: Tensor, graph_of_node, num_graphs: int, kind: str) -> Tensor:
    """Per-graph mean / sum / max reduction over node features."""
    if kind == "mean":
        return T.segment_mean(node_features, graph_of_node, num_graphs)
    if kind == "sum":
        return T.segment_sum(node_features, graph_of_node, num_graphs)
    if kind == "max":
        return T.segment_max(node_features, graph_of_node, num_graphs)
    raise ValueError(f"unknown pooling kind '{kind}'")


def node_head(node_features: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """Per-node class logits; node tasks skip pooling entirely."""
    return T.affine(node_features, weight, bias)
