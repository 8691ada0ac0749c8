"""Dense float64 tensors with tape-based reverse-mode differentiation.

Operations run eagerly on numpy buffers. When a Tape is active (entered as a
context manager) and any input is tracked, the operation is recorded; a later
``backward(loss)`` replays the records in reverse creation order, which is a
reverse topological order by construction. Without an active tape every
operation is a plain numpy computation, which is the evaluation fast path.

Everything is float64: gradient checks and the trigonometric kernel
identities in this package rely on it.
"""

from __future__ import annotations

import threading

import numpy as np


class ShapeError(ValueError):
    """Operand shapes are incompatible with the requested operation."""


_STACK = threading.local()


def _tapes():
    stack = getattr(_STACK, "stack", None)
    if stack is None:
        stack = []
        _STACK.stack = stack
    return stack


def active_tape():
    stack = _tapes()
    return stack[-1] if stack else None


class Tensor:
    """A dense float64 array with an optional gradient buffer."""

    __slots__ = ("data", "grad", "requires_grad")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad = None
        self.requires_grad = bool(requires_grad)

    @property
    def shape(self):
        return self.data.shape

    @property
    def size(self):
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return sub(self, other)

    def __mul__(self, other):
        return mul(self, other)

    def __matmul__(self, other):
        return matmul(self, other)

    def __neg__(self):
        return mul(self, Tensor(-1.0))


class Tape:
    """Ordered record of primitive operations for one execution context.

    Creation order is a topological order of the data flow, so the reverse
    sweep in backward() visits operations in strict reverse topological
    order. clear() drops all records; parameter tensors are untouched.
    """

    def __init__(self):
        self._nodes = []  # (out, inputs, backward_fn)
        self._produced = set()

    def __enter__(self):
        _tapes().append(self)
        return self

    def __exit__(self, exc_type, exc, tb):
        stack = _tapes()
        assert stack and stack[-1] is self
        stack.pop()
        return False

    def record(self, out, inputs, backward_fn):
        out.requires_grad = True
        self._nodes.append((out, inputs, backward_fn))
        self._produced.add(id(out))

    def clear(self):
        self._nodes.clear()
        self._produced.clear()


def _record(out: Tensor, inputs, backward_fn) -> Tensor:
    tape = active_tape()
    if tape is not None and any(t.requires_grad for t in inputs):
        tape.record(out, inputs, backward_fn)
    return out


def backward(loss: Tensor, tape: Tape | None = None) -> None:
    """Accumulate d(loss)/d(tensor) into .grad of every tracked leaf tensor.

    ``loss`` must be a scalar produced on the tape. Repeated calls without
    zeroing accumulate. Gradients of intermediates are kept tape-local; only
    leaves (tensors not produced by a recorded op) retain .grad afterwards.
    """
    tape = tape if tape is not None else active_tape()
    if tape is None:
        raise RuntimeError("backward() requires an active Tape")
    if loss.data.size != 1:
        raise ShapeError(f"loss must be scalar, got shape {loss.data.shape}")
    if id(loss) not in tape._produced:
        raise RuntimeError("loss was not produced on the current tape")

    pending = {id(loss): np.ones_like(loss.data)}
    for out, inputs, backward_fn in reversed(tape._nodes):
        gout = pending.pop(id(out), None)
        if gout is None:
            continue
        for tensor, gin in zip(inputs, backward_fn(gout)):
            if gin is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in tape._produced:
                if key in pending:
                    pending[key] = pending[key] + gin
                else:
                    pending[key] = gin
            elif tensor.grad is None:
                tensor.grad = gin.copy()
            else:
                tensor.grad += gin


# ---------------------------------------------------------------------------
# elementwise and linear algebra primitives


def _unbroadcast(grad: np.ndarray, shape) -> np.ndarray:
    """Reduce a broadcasted gradient back to ``shape``."""
    if grad.shape == tuple(shape):
        return grad
    extra = grad.ndim - len(shape)
    if extra > 0:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad


def _check_broadcast(a: Tensor, b: Tensor, op: str):
    try:
        np.broadcast_shapes(a.data.shape, b.data.shape)
    except ValueError:
        raise ShapeError(f"{op}: shapes {a.data.shape} and {b.data.shape} do not align") from None


def add(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "add")
    out = Tensor(a.data + b.data)
    return _record(out, (a, b), lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(g, b.data.shape)))


def sub(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "sub")
    out = Tensor(a.data - b.data)
    return _record(out, (a, b), lambda g: (_unbroadcast(g, a.data.shape), _unbroadcast(-g, b.data.shape)))


def mul(a: Tensor, b: Tensor) -> Tensor:
    _check_broadcast(a, b, "mul")
    out = Tensor(a.data * b.data)

    def grad(g):
        return (_unbroadcast(g * b.data, a.data.shape), _unbroadcast(g * a.data, b.data.shape))

    return _record(out, (a, b), grad)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.data.ndim != 2 or b.data.ndim != 2 or a.data.shape[1] != b.data.shape[0]:
        raise ShapeError(f"matmul: shapes {a.data.shape} and {b.data.shape} do not align")
    out = Tensor(a.data @ b.data)
    return _record(out, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def sin(x: Tensor) -> Tensor:
    out = Tensor(np.sin(x.data))
    return _record(out, (x,), lambda g: (g * np.cos(x.data),))


def cos(x: Tensor) -> Tensor:
    out = Tensor(np.cos(x.data))
    return _record(out, (x,), lambda g: (-g * np.sin(x.data),))


def sincos(x: Tensor):
    """(sin(x), cos(x)) in one pass; backward reuses the forward values."""
    s_data, c_data = np.sin(x.data), np.cos(x.data)
    s, c = Tensor(s_data), Tensor(c_data)
    _record(s, (x,), lambda g: (g * c_data,))
    _record(c, (x,), lambda g: (-g * s_data,))
    return s, c


def harmonic_expand(p: Tensor, frequencies) -> Tensor:
    """Concatenated [sin(w_k p) || cos(w_k p)] blocks, frequency-major.

    ``frequencies`` may be a plain array (fixed schedule) or a (K,) Tensor
    (learned schedule, gradient flows into it). For p of shape (R, F) the
    output is (R, 2*K*F); the forward sin/cos values are reused in the
    backward pass, which is why this is one fused primitive.
    """
    freq_tensor = frequencies if isinstance(frequencies, Tensor) else None
    w = freq_tensor.data if freq_tensor is not None else np.asarray(frequencies, dtype=np.float64)
    if p.data.ndim != 2 or w.ndim != 1 or w.size < 1:
        raise ShapeError(
            f"harmonic_expand: projection {p.data.shape} with frequencies {w.shape}")
    rows, width = p.data.shape
    k = w.size
    scaled = p.data[:, None, :] * w[None, :, None]
    out_data = np.empty((rows, 2 * k * width))
    blocks = out_data.reshape(rows, k, 2, width)
    sines = np.sin(scaled, out=blocks[:, :, 0, :])
    cosines = np.cos(scaled, out=blocks[:, :, 1, :])
    out = Tensor(out_data)

    def grad(g):
        gb = g.reshape(rows, k, 2, width)
        inner = gb[:, :, 0, :] * cosines - gb[:, :, 1, :] * sines  # (R, K, F)
        gp = (inner * w[None, :, None]).sum(axis=1)
        if freq_tensor is None:
            return (gp,)
        gw = (inner * p.data[:, None, :]).sum(axis=(0, 2))
        return (gp, gw)

    inputs = (p, freq_tensor) if freq_tensor is not None else (p,)
    return _record(out, inputs, grad)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    out = Tensor(np.maximum(x.data, 0.0))  # np.maximum propagates NaN
    return _record(out, (x,), lambda g: (g * mask,))


def leaky_relu(x: Tensor, slope: float = 0.2) -> Tensor:
    mask = x.data > 0
    out = Tensor(np.where(mask, x.data, slope * x.data))
    return _record(out, (x,), lambda g: (g * np.where(mask, 1.0, slope),))


def sigmoid(x: Tensor) -> Tensor:
    # split by sign for overflow-free exp
    s = np.where(x.data >= 0, 1.0 / (1.0 + np.exp(-np.abs(x.data))),
                 np.exp(-np.abs(x.data)) / (1.0 + np.exp(-np.abs(x.data))))
    out = Tensor(s)
    return _record(out, (x,), lambda g: (g * s * (1.0 - s),))


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool = True) -> Tensor:
    """Inverted dropout: survivors scaled by 1/(1-rate); identity in eval mode."""
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    keep = rng.random(x.data.shape) >= rate
    scale = 1.0 / (1.0 - rate)
    out = Tensor(x.data * keep * scale)
    return _record(out, (x,), lambda g: (g * keep * scale,))


def reshape(x: Tensor, shape) -> Tensor:
    out = Tensor(x.data.reshape(shape))
    return _record(out, (x,), lambda g: (g.reshape(x.data.shape),))


def concat_cols(parts) -> Tensor:
    """Concatenate 2-D tensors with equal row counts along columns."""
    parts = list(parts)
    rows = parts[0].data.shape[0]
    for p in parts:
        if p.data.ndim != 2 or p.data.shape[0] != rows:
            raise ShapeError(f"concat_cols: expected ({rows}, *) blocks, got {p.data.shape}")
    out = Tensor(np.concatenate([p.data for p in parts], axis=1))
    offsets = np.cumsum([0] + [p.data.shape[1] for p in parts])

    def grad(g):
        return tuple(g[:, offsets[i]:offsets[i + 1]] for i in range(len(parts)))

    return _record(out, tuple(parts), grad)


def take_rows(x: Tensor, indices) -> Tensor:
    """Gather rows (2-D) or elements (1-D) along axis 0."""
    idx = np.asarray(indices, dtype=np.int64)
    n = x.data.shape[0]
    if idx.size and (idx.min() < 0 or idx.max() >= n):
        raise IndexError(f"take_rows: index out of range for axis of extent {n}")
    out = Tensor(x.data[idx])

    def grad(g):
        gx = np.zeros_like(x.data)
        _scatter_add(gx, idx, g)
        return (gx,)

    return _record(out, (x,), grad)


def rowwise_matvec(mats: Tensor, vecs: Tensor) -> Tensor:
    """Per-row matrix--vector product.

    Row r of ``mats`` holds an (F, d) matrix in row-major order; row r of
    ``vecs`` is a d-vector. Output row r is the F-vector mats_r @ vecs_r.
    """
    if mats.data.ndim != 2 or vecs.data.ndim != 2 or mats.data.shape[0] != vecs.data.shape[0]:
        raise ShapeError(f"rowwise_matvec: shapes {mats.data.shape} and {vecs.data.shape} do not align")
    rows, d = vecs.data.shape
    if mats.data.shape[1] % d != 0:
        raise ShapeError(f"rowwise_matvec: {mats.data.shape[1]} columns not divisible by vector extent {d}")
    f = mats.data.shape[1] // d
    blocks = mats.data.reshape(rows, f, d)
    out = Tensor(np.einsum("rfd,rd->rf", blocks, vecs.data))

    def grad(g):
        gmats = (g[:, :, None] * vecs.data[:, None, :]).reshape(rows, f * d)
        gvecs = np.einsum("rf,rfd->rd", g, blocks)
        return (gmats, gvecs)

    return _record(out, (mats, vecs), grad)


def edge_project(proj: Tensor, phase: Tensor, feats: Tensor, src, dst) -> Tensor:
    """Receiver-conditioned projection of sender features, fused per edge.

    For each directed edge e = (src[e] -> dst[e]):

        out[e] = reshape(proj[dst[e]], (F, d)) @ feats[src[e]] + phase[dst[e]]

    Equivalent to gathers plus rowwise_matvec plus add, collapsed into one
    recorded operation to keep tape and memory traffic down on hot paths.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    n, d = feats.data.shape
    f = phase.data.shape[1]
    if proj.data.shape != (n, f * d):
        raise ShapeError(
            f"edge_project: projection {proj.data.shape} incompatible with "
            f"{n} nodes, F={f}, d={d}")
    idx_ok = lambda a: a.size == 0 or (a.min() >= 0 and a.max() < n)
    if not (idx_ok(src) and idx_ok(dst)):
        raise IndexError(f"edge_project: edge endpoint out of range for {n} nodes")
    blocks = proj.data.reshape(n, f, d)[dst]          # (E, F, d)
    sender = feats.data[src]                          # (E, d)
    out = Tensor(np.einsum("efd,ed->ef", blocks, sender) + phase.data[dst])

    def grad(g):
        gproj = np.zeros_like(proj.data)
        _scatter_add(gproj, dst, (g[:, :, None] * sender[:, None, :]).reshape(-1, f * d))
        gphase = np.zeros_like(phase.data)
        _scatter_add(gphase, dst, g)
        gfeats = np.zeros_like(feats.data)
        _scatter_add(gfeats, src, np.einsum("ef,efd->ed", g, blocks))
        return (gproj, gphase, gfeats)

    return _record(out, (proj, phase, feats), grad)


# ---------------------------------------------------------------------------
# segment reductions (per-destination aggregation)


def _scatter_add(target: np.ndarray, idx: np.ndarray, values: np.ndarray) -> None:
    """target[idx[i]] += values[i], with repeated indices accumulated."""
    if idx.size == 0:
        return
    np.add.at(target, idx, values)


def _segment_ids(segment_of, num_segments: int) -> np.ndarray:
    seg = np.asarray(segment_of, dtype=np.int64)
    if seg.size and (seg.min() < 0 or seg.max() >= num_segments):
        raise IndexError(f"segment index out of range for {num_segments} segments")
    return seg


def segment_sum(values: Tensor, segment_of, num_segments: int) -> Tensor:
    """Sum rows of ``values`` into their segment; empty segments give zero rows."""
    seg = _segment_ids(segment_of, num_segments)
    if values.data.shape[0] != seg.shape[0]:
        raise ShapeError(f"segment_sum: {values.data.shape[0]} rows vs {seg.shape[0]} segment ids")
    acc = np.zeros((num_segments,) + values.data.shape[1:])
    _scatter_add(acc, seg, values.data)
    out = Tensor(acc)
    return _record(out, (values,), lambda g: (g[seg],))


def segment_mean(values: Tensor, segment_of, num_segments: int) -> Tensor:
    """Per-segment mean. Every segment must contain at least one row."""
    seg = _segment_ids(segment_of, num_segments)
    counts = np.bincount(seg, minlength=num_segments)
    if (counts == 0).any():
        raise ValueError(f"segment_mean: segment {int(np.argmax(counts == 0))} is empty")
    acc = np.zeros((num_segments,) + values.data.shape[1:])
    _scatter_add(acc, seg, values.data)
    denom = counts.reshape((num_segments,) + (1,) * (values.data.ndim - 1)).astype(np.float64)
    out = Tensor(acc / denom)
    return _record(out, (values,), lambda g: ((g / denom)[seg],))


def segment_max(values: Tensor, segment_of, num_segments: int) -> Tensor:
    """Per-segment column-wise maximum; gradient flows to the first maximizer."""
    seg = _segment_ids(segment_of, num_segments)
    counts = np.bincount(seg, minlength=num_segments)
    if (counts == 0).any():
        raise ValueError(f"segment_max: segment {int(np.argmax(counts == 0))} is empty")
    data = values.data if values.data.ndim == 2 else values.data[:, None]
    order = np.argsort(seg, kind="stable")
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    result = np.empty((num_segments, data.shape[1]))
    argrows = np.empty((num_segments, data.shape[1]), dtype=np.int64)
    for s in range(num_segments):
        rows = order[starts[s]:starts[s] + counts[s]]
        block = data[rows]
        local = np.argmax(block, axis=0)
        result[s] = block[local, np.arange(data.shape[1])]
        argrows[s] = rows[local]
    out = Tensor(result if values.data.ndim == 2 else result[:, 0])

    def grad(g):
        gmat = g if values.data.ndim == 2 else g[:, None]
        gx = np.zeros_like(data)
        cols = np.broadcast_to(np.arange(data.shape[1]), argrows.shape)
        np.add.at(gx, (argrows.ravel(), cols.ravel()), gmat.ravel())
        return (gx if values.data.ndim == 2 else gx[:, 0],)

    return _record(out, (values,), grad)


def segment_softmax(scores: Tensor, segment_of, num_segments: int) -> Tensor:
    """Exp-normalize scores within each segment (max-subtracted for stability)."""
    if scores.data.ndim != 1:
        raise ShapeError(f"segment_softmax expects 1-D scores, got shape {scores.data.shape}")
    seg = _segment_ids(segment_of, num_segments)
    if scores.data.shape[0] != seg.shape[0]:
        raise ShapeError(f"segment_softmax: {scores.data.shape[0]} scores vs {seg.shape[0]} segment ids")
    maxes = np.full(num_segments, -np.inf)
    np.maximum.at(maxes, seg, scores.data)
    shifted = np.exp(scores.data - maxes[seg])
    sums = np.bincount(seg, weights=shifted, minlength=num_segments)
    alpha = shifted / sums[seg]
    out = Tensor(alpha)

    def grad(g):
        weighted = alpha * g
        per_seg = np.bincount(seg, weights=weighted, minlength=num_segments)
        return (weighted - alpha * per_seg[seg],)

    return _record(out, (scores,), grad)


# ---------------------------------------------------------------------------
# reductions and loss


def sum_all(x: Tensor) -> Tensor:
    out = Tensor(np.sum(x.data))
    return _record(out, (x,), lambda g: (np.broadcast_to(g, x.data.shape).copy(),))


def mean_all(x: Tensor) -> Tensor:
    out = Tensor(np.mean(x.data))
    return _record(out, (x,), lambda g: (np.broadcast_to(g / x.data.size, x.data.shape).copy(),))


def cross_entropy(logits: Tensor, labels) -> Tensor:
    """Mean softmax cross-entropy of row-wise logits against int class labels."""
    y = np.asarray(labels, dtype=np.int64)
    if logits.data.ndim != 2 or y.shape != (logits.data.shape[0],):
        raise ShapeError(f"cross_entropy: logits {logits.data.shape} vs labels {y.shape}")
    if y.size and (y.min() < 0 or y.max() >= logits.data.shape[1]):
        raise IndexError("cross_entropy: label out of range")
    n = logits.data.shape[0]
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    expz = np.exp(shifted)
    probs = expz / expz.sum(axis=1, keepdims=True)
    nll = np.log(expz.sum(axis=1)) - shifted[np.arange(n), y]
    out = Tensor(nll.mean())

    def grad(g):
        gl = probs.copy()
        gl[np.arange(n), y] -= 1.0
        return (gl * (g / n),)

    return _record(out, (logits,), grad)


def affine(x: Tensor, weight: Tensor, bias: Tensor) -> Tensor:
    """x @ weight + bias, the basic dense layer."""
    return add(matmul(x, weight), bias)


def softmax_rows(logits: np.ndarray) -> np.ndarray:
    """Plain numpy row softmax for evaluation paths."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    expz = np.exp(shifted)
    return expz / expz.sum(axis=1, keepdims=True)
