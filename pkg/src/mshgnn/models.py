"""Trainable graph classifiers with the scikit-learn estimator protocol.

Each estimator owns a ParamStore, trains with Adam on softmax
cross-entropy, and exposes fit / predict / predict_proba / transform
(graph embeddings) / score. Hyperparameters are plain constructor
attributes, so get_params, set_params, and clone work as usual.

All three models share the same skeleton: an input stage, a stack of
message passing layers, a graph-level pooling stage, and a two-affine
classification head (widths hidden -> head -> classes). They differ only
in the message function and, for the harmonic model, the readout.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from threadpoolctl import threadpool_limits

from . import tensor as T
from .baselines import gat_layer, gcn_layer, init_gat_layer, init_gcn_layer
from .graphs import Graph, GraphBatch, batch
from .layers import HarmonicSpec, forward_layer, init_msh_layer
from .optim import ParamStore, adam_step, glorot_init
from .readout import (POOLING_KINDS, SIGMA_MODES, attention_pool, fuse_layers,
                      graph_embed, init_readout, simple_pool)
from .rng import make_rng
from .tensor import Tape, Tensor


class TrainingDiverged(RuntimeError):
    """Loss became non-finite; carries the epoch, batch, and parameter norms."""

    def __init__(self, epoch: int, batch_index: int, param_norms: dict[str, float]):
        self.epoch = epoch
        self.batch_index = batch_index
        self.param_norms = param_norms
        worst = max(param_norms.items(), key=lambda kv: kv[1]) if param_norms else ("-", 0.0)
        super().__init__(
            f"non-finite loss at epoch {epoch}, batch {batch_index}; "
            f"largest parameter norm {worst[0]}={worst[1]:.3e}")


def check_graph_list(graphs) -> list[Graph]:
    """Validate a training/eval collection: Graphs with uniform feature width."""
    graphs = list(graphs)
    if not graphs:
        raise ValueError("expected a non-empty list of graphs")
    for i, g in enumerate(graphs):
        if not isinstance(g, Graph):
            raise TypeError(f"item {i} is {type(g).__name__}, expected Graph")
        if g.features is None:
            raise ValueError(f"graph {i} has no features; featurize before fitting")
    dims = {g.feature_dim() for g in graphs}
    if len(dims) != 1:
        raise ValueError(f"feature dimensions differ across graphs: {sorted(dims)}")
    return graphs


def resolve_labels(graphs, y=None) -> np.ndarray:
    if y is None:
        if any(g.graph_label is None for g in graphs):
            raise ValueError("labels missing: pass y or set graph_label on every graph")
        y = [g.graph_label for g in graphs]
    y = np.asarray(y, dtype=np.int64)
    if y.shape != (len(graphs),):
        raise ValueError(f"labels shape {y.shape} does not match {len(graphs)} graphs")
    if y.size and y.min() < 0:
        raise ValueError("labels must be non-negative class indices")
    return y


class GraphClassifierBase(BaseEstimator):
    """Shared training loop; subclasses build parameters and the forward pass."""

    def init_params(self, feature_dim: int, num_classes: int) -> "GraphClassifierBase":
        """Initialize weights without training (fit calls this first).

        Exposed so randomly initialized models can be embedded and compared
        directly, which the expressiveness checks rely on.
        """
        self.feature_dim_ = int(feature_dim)
        self.num_classes_ = int(num_classes)
        self.store_ = ParamStore()
        rng = make_rng(self.seed, stream=1)
        self._build(self.store_, rng)
        head_in = self._embedding_dim()
        self.head_weight_ = self.store_.add("head.weight", glorot_init((head_in, self.head), rng))
        self.head_bias_ = self.store_.add("head.bias", np.zeros(self.head))
        self.cls_weight_ = self.store_.add("classifier.weight",
                                           glorot_init((self.head, self.num_classes_), rng))
        self.cls_bias_ = self.store_.add("classifier.bias", np.zeros(self.num_classes_))
        return self

    # subclass hooks -------------------------------------------------------

    def _build(self, store: ParamStore, rng) -> None:
        raise NotImplementedError

    def _embed(self, b: GraphBatch, training: bool, rng) -> Tensor:
        """Graph-level embedding (num_graphs, hidden)."""
        raise NotImplementedError

    def _embedding_dim(self) -> int:
        return self.hidden

    # shared machinery ------------------------------------------------------

    def _logits(self, b: GraphBatch, training: bool, rng) -> Tensor:
        embedding = self._embed(b, training, rng)
        hidden = T.relu(T.affine(embedding, self.head_weight_, self.head_bias_))
        return T.affine(hidden, self.cls_weight_, self.cls_bias_)

    def param_count(self) -> int:
        return self.store_.total_count()

    def fit(self, graphs, y=None):
        graphs = check_graph_list(graphs)
        y = resolve_labels(graphs, y)
        classes = self.num_classes if self.num_classes else int(y.max()) + 1
        if y.max() >= classes:
            raise ValueError(f"label {int(y.max())} out of range for {classes} classes")
        self.init_params(graphs[0].feature_dim(), classes)

        # single-threaded BLAS: at these matrix sizes thread sync costs more
        # than it buys, and a fixed reduction order aids reproducibility
        with threadpool_limits(limits=1):
            self._train_epochs(graphs, y)
        return self

    def _train_epochs(self, graphs, y):
        rng_shuffle = make_rng(self.seed, stream=2)
        rng_dropout = make_rng(self.seed, stream=3)
        n = len(graphs)
        losses, accuracies = [], []
        best_loss, stale = np.inf, 0
        for epoch in range(self.epochs):
            order = rng_shuffle.permutation(n)
            total_loss, correct = 0.0, 0
            for bi, start in enumerate(range(0, n, self.batch_size)):
                idx = order[start:start + self.batch_size]
                chunk = batch([graphs[i] for i in idx])
                targets = y[idx]
                with Tape() as tape:
                    logits = self._logits(chunk, training=True, rng=rng_dropout)
                    loss = T.cross_entropy(logits, targets)
                    if not np.isfinite(loss.data):
                        raise TrainingDiverged(epoch, bi, {
                            name: float(np.linalg.norm(p.data))
                            for name, p in self.store_.items()})
                    T.backward(loss, tape)
                self.store_.fill_missing_grads()
                adam_step(self.store_, lr=self.lr)
                total_loss += float(loss.data) * len(idx)
                correct += int((np.argmax(logits.data, axis=1) == targets).sum())
            losses.append(total_loss / n)
            accuracies.append(correct / n)
            if self.patience:
                if losses[-1] < best_loss - 1e-12:
                    best_loss, stale = losses[-1], 0
                else:
                    stale += 1
                    if stale >= self.patience:
                        break
        self.train_losses_ = losses
        self.train_accuracies_ = accuracies

    def _eval_batches(self, graphs):
        graphs = check_graph_list(graphs)
        if graphs[0].feature_dim() != self.feature_dim_:
            raise ValueError(
                f"feature dim {graphs[0].feature_dim()} != fitted dim {self.feature_dim_}")
        step = max(1, self.batch_size)
        for start in range(0, len(graphs), step):
            yield batch(graphs[start:start + step])

    def decision_function(self, graphs) -> np.ndarray:
        with threadpool_limits(limits=1):
            return np.concatenate(
                [self._logits(b, training=False, rng=None).data
                 for b in self._eval_batches(graphs)], axis=0)

    def predict_proba(self, graphs) -> np.ndarray:
        return T.softmax_rows(self.decision_function(graphs))

    def predict(self, graphs) -> np.ndarray:
        return np.argmax(self.decision_function(graphs), axis=1)

    def transform(self, graphs) -> np.ndarray:
        """Graph-level embeddings (num_graphs, hidden), evaluation mode."""
        with threadpool_limits(limits=1):
            return np.concatenate(
                [self._embed(b, training=False, rng=None).data
                 for b in self._eval_batches(graphs)], axis=0)

    def score(self, graphs, y=None) -> float:
        y = resolve_labels(list(graphs), y)
        return float(np.mean(self.predict(graphs) == y))


class MshGnnClassifier(GraphClassifierBase):
    """Multi-scale harmonic message passing with frequency-aware readout."""

    def __init__(self, layers=3, hidden=64, head=16, projection_dim=16,
                 frequency_mode="exponential", num_frequencies=3, frequencies=None,
                 pooling="attention", sigma="softmax", lr=0.001, dropout=0.1,
                 epochs=200, batch_size=32, patience=0, seed=0, num_classes=None):
        self.layers = layers
        self.hidden = hidden
        self.head = head
        self.projection_dim = projection_dim
        self.frequency_mode = frequency_mode
        self.num_frequencies = num_frequencies
        self.frequencies = frequencies
        self.pooling = pooling
        self.sigma = sigma
        self.lr = lr
        self.dropout = dropout
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.seed = seed
        self.num_classes = num_classes

    def _build(self, store, rng):
        if self.pooling not in POOLING_KINDS:
            raise ValueError(f"unknown pooling '{self.pooling}'")
        if self.sigma not in SIGMA_MODES:
            raise ValueError(f"unknown sigma mode '{self.sigma}'")
        self.spec_ = HarmonicSpec.make(self.frequency_mode, self.num_frequencies,
                                       self.frequencies)
        self.encoder_weight_ = store.add("encoder.weight",
                                         glorot_init((self.feature_dim_, self.hidden), rng))
        self.encoder_bias_ = store.add("encoder.bias", np.zeros(self.hidden))
        self.layer_params_ = [
            init_msh_layer(store, f"layer{i}", self.hidden, self.projection_dim,
                           self.spec_, rng)
            for i in range(self.layers)]
        self.readout_params_ = (
            init_readout(store, "readout", self.hidden, self.layers, rng)
            if self.pooling == "attention" else None)

    def _embed(self, b: GraphBatch, training, rng):
        h = T.affine(Tensor(b.features), self.encoder_weight_, self.encoder_bias_)
        messages = []
        for params in self.layer_params_:
            h, msgs = forward_layer(h, b.src, b.dst, b.num_nodes, params, self.spec_,
                                    dropout_rate=self.dropout, training=training, rng=rng)
            messages.append(msgs)
        if self.pooling == "attention":
            per_layer = [
                graph_embed(attention_pool(msgs, b.dst, b.num_nodes,
                                           self.readout_params_, self.sigma),
                            b.graph_of_node, b.num_graphs)
                for msgs in messages]
            return fuse_layers(per_layer, self.readout_params_.fusion)
        return simple_pool(h, b.graph_of_node, b.num_graphs, self.pooling)


class GcnClassifier(GraphClassifierBase):
    """Symmetric-normalized convolution baseline with mean pooling."""

    def __init__(self, layers=3, hidden=64, head=16, lr=0.001, dropout=0.1,
                 epochs=200, batch_size=32, patience=0, seed=0, num_classes=None):
        self.layers = layers
        self.hidden = hidden
        self.head = head
        self.lr = lr
        self.dropout = dropout
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.seed = seed
        self.num_classes = num_classes

    def _build(self, store, rng):
        dims = [self.feature_dim_] + [self.hidden] * self.layers
        self.layer_params_ = [
            init_gcn_layer(store, f"layer{i}", dims[i], dims[i + 1], rng)
            for i in range(self.layers)]

    def _embed(self, b: GraphBatch, training, rng):
        h = Tensor(b.features)
        for params in self.layer_params_:
            h = gcn_layer(h, b.src, b.dst, b.num_nodes, params)
            if training and self.dropout > 0.0:
                h = T.dropout(h, self.dropout, rng, training=True)
        return simple_pool(h, b.graph_of_node, b.num_graphs, "mean")


class GatClassifier(GraphClassifierBase):
    """Single-head attention baseline with mean pooling."""

    def __init__(self, layers=3, hidden=64, head=16, leaky_slope=0.2, lr=0.001,
                 dropout=0.1, epochs=200, batch_size=32, patience=0, seed=0,
                 num_classes=None):
        self.layers = layers
        self.hidden = hidden
        self.head = head
        self.leaky_slope = leaky_slope
        self.lr = lr
        self.dropout = dropout
        self.epochs = epochs
        self.batch_size = batch_size
        self.patience = patience
        self.seed = seed
        self.num_classes = num_classes

    def _build(self, store, rng):
        dims = [self.feature_dim_] + [self.hidden] * self.layers
        self.layer_params_ = [
            init_gat_layer(store, f"layer{i}", dims[i], dims[i + 1], rng, self.leaky_slope)
            for i in range(self.layers)]

    def _embed(self, b: GraphBatch, training, rng):
        h = Tensor(b.features)
        for params in self.layer_params_:
            h = gat_layer(h, b.src, b.dst, b.num_nodes, params)
            if training and self.dropout > 0.0:
                h = T.dropout(h, self.dropout, rng, training=True)
        return simple_pool(h, b.graph_of_node, b.num_graphs, "mean")


MODEL_REGISTRY = {
    "msh": MshGnnClassifier,
    "gcn": GcnClassifier,
    "gat": GatClassifier,
}
