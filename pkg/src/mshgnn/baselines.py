"""GCN and GAT layers plus a width search for matching parameter budgets.

Both baselines are the minimal single-head forms: GCN propagates over the
symmetric-normalized adjacency with self-loops and applies an affine map
with a rectifier; GAT scores each (receiver, sender) pair with a shared
attention vector, softmax-normalizes over incoming edges (self-loop
included), and takes the attention-weighted sum of transformed senders
with no output nonlinearity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor as T
from .optim import ParamStore, glorot_init
from .tensor import Tensor


@dataclass
class GcnLayerParams:
    weight: Tensor  # (d_in, d_out)
    bias: Tensor    # (d_out,)


@dataclass
class GatLayerParams:
    weight: Tensor     # (d_in, d_out)
    attention: Tensor  # (2 * d_out,): receiver half then sender half
    leaky_slope: float = 0.2


def init_gcn_layer(store: ParamStore, prefix: str, d_in: int, d_out: int,
                   rng: np.random.Generator) -> GcnLayerParams:
    return GcnLayerParams(
        weight=store.add(f"{prefix}.weight", glorot_init((d_in, d_out), rng)),
        bias=store.add(f"{prefix}.bias", np.zeros(d_out)),
    )


def init_gat_layer(store: ParamStore, prefix: str, d_in: int, d_out: int,
                   rng: np.random.Generator, leaky_slope: float = 0.2) -> GatLayerParams:
    return GatLayerParams(
        weight=store.add(f"{prefix}.weight", glorot_init((d_in, d_out), rng)),
        attention=store.add(f"{prefix}.attention", glorot_init((2 * d_out, 1), rng).data[:, 0]),
        leaky_slope=leaky_slope,
    )


def _with_self_loops(src: np.ndarray, dst: np.ndarray, num_nodes: int):
    loops = np.arange(num_nodes, dtype=np.int64)
    return np.concatenate([src, loops]), np.concatenate([dst, loops])


def gcn_layer(features: Tensor, src, dst, num_nodes: int, params: GcnLayerParams) -> Tensor:
    """relu(D^-1/2 (A + I) D^-1/2 X W + b) over the symmetric edge set."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    degrees = np.bincount(dst, minlength=num_nodes) + 1.0  # + self-loop
    inv_sqrt = 1.0 / np.sqrt(degrees)
    loop_src, loop_dst = _with_self_loops(src, dst, num_nodes)
    coeff = inv_sqrt[loop_src] * inv_sqrt[loop_dst]
    gathered = T.mul(T.take_rows(features, loop_src), Tensor(coeff[:, None]))
    propagated = T.segment_sum(gathered, loop_dst, num_nodes)
    return T.relu(T.affine(propagated, params.weight, params.bias))


def gat_layer(features: Tensor, src, dst, num_nodes: int, params: GatLayerParams) -> Tensor:
    """Attention-weighted sum of transformed senders, self-loop included."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    d_out = params.weight.data.shape[1]
    transformed = T.matmul(features, params.weight)
    a_receiver = T.reshape(T.take_rows(params.attention, list(range(d_out))), (d_out, 1))
    a_sender = T.reshape(T.take_rows(params.attention, list(range(d_out, 2 * d_out))), (d_out, 1))
    score_receiver = T.reshape(T.matmul(transformed, a_receiver), (-1,))
    score_sender = T.reshape(T.matmul(transformed, a_sender), (-1,))
    loop_src, loop_dst = _with_self_loops(src, dst, num_nodes)
    logits = T.leaky_relu(
        T.add(T.take_rows(score_receiver, loop_dst), T.take_rows(score_sender, loop_src)),
        params.leaky_slope)
    alpha = T.segment_softmax(logits, loop_dst, num_nodes)
    weighted = T.mul(T.reshape(alpha, (-1, 1)), T.take_rows(transformed, loop_src))
    return T.segment_sum(weighted, loop_dst, num_nodes)


def match_param_budget(count_for_width, target_count: int, tolerance: float = 0.15,
                       max_width: int = 256):
    """Smallest hidden width whose parameter count is within tolerance of target.

    ``count_for_width`` maps a width to a total parameter count. Raises when
    no width in [1, max_width] lands inside the tolerance band.
    """
    if target_count < 1:
        raise ValueError(f"target parameter count must be positive, got {target_count}")
    band = tolerance * target_count
    for width in range(1, max_width + 1):
        count = count_for_width(width)
        if abs(count - target_count) <= band:
            return width, count
    raise ValueError(
        f"no width in [1, {max_width}] puts the parameter count within "
        f"{tolerance:.0%} of {target_count}")
