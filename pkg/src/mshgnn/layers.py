"""Message passing layer with node-conditioned projection and harmonic codes.

For a directed edge (u -> v) the receiver v generates its own projection
matrix and phase vector from its current state, projects the sender's
features into that subspace, expands the projection through a bank of
sine/cosine maps at several frequencies, and mixes the code back to feature
width. Aggregation is a plain sum over incoming edges followed by a
residual two-layer MLP update.

All functions here are batched: node tensors are (N, d), edge tensors are
(E, *), and edges are given as src/dst index arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .optim import ParamStore, glorot_init
from .tensor import Tensor

FREQUENCY_MODES = ("none", "single", "linear", "exponential", "learned")


@dataclass(frozen=True)
class HarmonicSpec:
    """Modulation frequencies and how they were chosen.

    Frequencies must be strictly positive and pairwise distinct. Mode
    ``none`` has no frequencies and routes projections through unmodulated;
    mode ``learned`` uses these values only as the trainable initialization.
    """

    mode: str
    frequencies: tuple[float, ...] = field(default=())

    def __post_init__(self):
        if self.mode not in FREQUENCY_MODES:
            raise ValueError(f"unknown frequency mode '{self.mode}'")
        if self.mode == "none":
            if self.frequencies:
                raise ValueError("mode 'none' takes no frequencies")
            return
        if not self.frequencies:
            raise ValueError(f"mode '{self.mode}' requires at least one frequency")
        if any(f <= 0 for f in self.frequencies):
            raise ValueError(f"frequencies must be strictly positive: {self.frequencies}")
        if len(set(self.frequencies)) != len(self.frequencies):
            raise ValueError(f"frequencies must be pairwise distinct: {self.frequencies}")

    @property
    def num_frequencies(self) -> int:
        return len(self.frequencies)

    def code_dim(self, projection_dim: int) -> int:
        """Width of the encoded projection consumed by the output mix."""
        if self.mode == "none":
            return projection_dim
        return 2 * projection_dim * self.num_frequencies

    @classmethod
    def make(cls, mode: str, num_frequencies: int = 3, frequencies=None) -> "HarmonicSpec":
        """Build the schedule for a mode; explicit frequencies override it."""
        if frequencies is not None:
            return cls(mode=mode, frequencies=tuple(float(f) for f in frequencies))
        if mode == "none":
            return cls(mode="none")
        if mode == "single":
            return cls(mode="single", frequencies=(1.0,))
        if mode == "linear":
            return cls(mode="linear", frequencies=tuple(float(k) for k in range(1, num_frequencies + 1)))
        if mode in ("exponential", "learned"):
            return cls(mode=mode, frequencies=tuple(2.0 ** k for k in range(num_frequencies)))
        raise ValueError(f"unknown frequency mode '{mode}'")


@dataclass
class MshLayerParams:
    """All learnable tensors of one layer. Created via init_msh_layer."""

    feature_dim: int
    projection_dim: int
    proj_weight: Tensor    # (d, F*d); row-major (F, d) blocks per node
    proj_bias: Tensor      # (F*d,)
    phase_weight: Tensor   # (d, F)
    phase_bias: Tensor     # (F,)
    out_weight: Tensor     # (code_dim, d)
    mlp_weight1: Tensor    # (d, d)
    mlp_bias1: Tensor      # (d,)
    mlp_weight2: Tensor    # (d, d)
    mlp_bias2: Tensor      # (d,)
    frequencies: Tensor | None = None  # (K,), learned mode only


def init_msh_layer(store: ParamStore, prefix: str, feature_dim: int, projection_dim: int,
                   spec: HarmonicSpec, rng: np.random.Generator) -> MshLayerParams:
    d, f = feature_dim, projection_dim
    code = spec.code_dim(f)
    params = MshLayerParams(
        feature_dim=d,
        projection_dim=f,
        proj_weight=store.add(f"{prefix}.proj_weight", glorot_init((d, f * d), rng)),
        proj_bias=store.add(f"{prefix}.proj_bias", np.zeros(f * d)),
        phase_weight=store.add(f"{prefix}.phase_weight", glorot_init((d, f), rng)),
        phase_bias=store.add(f"{prefix}.phase_bias", np.zeros(f)),
        out_weight=store.add(f"{prefix}.out_weight", glorot_init((code, d), rng)),
        mlp_weight1=store.add(f"{prefix}.mlp_weight1", glorot_init((d, d), rng)),
        mlp_bias1=store.add(f"{prefix}.mlp_bias1", np.zeros(d)),
        mlp_weight2=store.add(f"{prefix}.mlp_weight2", glorot_init((d, d), rng)),
        mlp_bias2=store.add(f"{prefix}.mlp_bias2", np.zeros(d)),
    )
    if spec.mode == "learned":
        params.frequencies = store.add(f"{prefix}.frequencies", np.array(spec.frequencies))
    return params


def generate_projection(features: Tensor, params: MshLayerParams):
    """Per-node projection blocks (N, F*d) and phase vectors (N, F)."""
    proj = T.affine(features, params.proj_weight, params.proj_bias)
    phase = T.affine(features, params.phase_weight, params.phase_bias)
    return proj, phase


def project(proj_rows: Tensor, phase_rows: Tensor, source_feats: Tensor) -> Tensor:
    """Apply each receiver's (F, d) block to its sender features, plus phase."""
    return T.add(T.rowwise_matvec(proj_rows, source_feats), phase_rows)


def harmonic_encode(projected: Tensor, spec: HarmonicSpec,
                    frequencies: Tensor | None = None) -> Tensor:
    """Concatenate [sin(w_k p) || cos(w_k p)] blocks in frequency order.

    ``frequencies`` (a trainable (K,) tensor) overrides the spec's constants
    and is how the learned schedule participates in training.
    """
    if spec.mode == "none":
        raise ValueError("harmonic_encode is undefined for mode 'none'")
    if frequencies is not None:
        return T.harmonic_expand(projected, frequencies)
    return T.harmonic_expand(projected, np.array(spec.frequencies))


def ablation_encode(projected: Tensor, spec: HarmonicSpec,
                    frequencies: Tensor | None = None) -> Tensor:
    """Mode dispatch: 'none' passes the projection through unmodulated."""
    if spec.mode == "none":
        return projected
    return harmonic_encode(projected, spec, frequencies)


def edge_messages(features: Tensor, src, dst, params: MshLayerParams,
                  spec: HarmonicSpec) -> Tensor:
    """Modulated messages (E, d) for directed edges src -> dst."""
    proj, phase = generate_projection(features, params)
    projected = T.edge_project(proj, phase, features, src, dst)
    code = ablation_encode(projected, spec, params.frequencies)
    return T.matmul(code, params.out_weight)


def forward_layer(features: Tensor, src, dst, num_nodes: int, params: MshLayerParams,
                  spec: HarmonicSpec, dropout_rate: float = 0.0,
                  training: bool = False, rng: np.random.Generator | None = None):
    """One layer update; returns (new features, per-edge messages).

    Messages are summed per destination, added residually, and pushed
    through the two-layer MLP; dropout hits the MLP output in training mode.
    The messages are returned for the frequency-aware readout.
    """
    if features.data.shape[0] != num_nodes:
        raise ValueError(f"features rows ({features.data.shape[0]}) != num_nodes ({num_nodes})")
    messages = edge_messages(features, src, dst, params, spec)
    aggregated = T.segment_sum(messages, dst, num_nodes)
    pre = T.add(features, aggregated)
    hidden = T.relu(T.affine(pre, params.mlp_weight1, params.mlp_bias1))
    out = T.affine(hidden, params.mlp_weight2, params.mlp_bias2)
    if training and dropout_rate > 0.0:
        if rng is None:
            raise ValueError("training-mode dropout requires an rng")
        out = T.dropout(out, dropout_rate, rng, training=True)
    return out, messages
