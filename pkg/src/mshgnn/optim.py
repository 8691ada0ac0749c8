"""Named parameter storage, Glorot initialization, and the Adam update."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def glorot_init(shape, rng: np.random.Generator) -> Tensor:
    """Uniform samples in +-sqrt(6 / (fan_in + fan_out)); 2-D shapes only."""
    if len(shape) != 2:
        raise ValueError(f"glorot_init expects a 2-D shape, got {tuple(shape)}")
    bound = np.sqrt(6.0 / (shape[0] + shape[1]))
    return Tensor(rng.uniform(-bound, bound, size=tuple(shape)))


class ParamStore:
    """Uniquely named trainable tensors plus per-parameter Adam state.

    Iteration is always in lexicographic name order, so update order never
    depends on registration order.
    """

    def __init__(self):
        self._params: dict[str, Tensor] = {}
        self._m: dict[str, np.ndarray] = {}
        self._v: dict[str, np.ndarray] = {}
        self.step_count = 0

    def add(self, name: str, value) -> Tensor:
        if name in self._params:
            raise ValueError(f"parameter '{name}' already registered")
        tensor = value if isinstance(value, Tensor) else Tensor(value)
        tensor.requires_grad = True
        self._params[name] = tensor
        self._m[name] = np.zeros_like(tensor.data)
        self._v[name] = np.zeros_like(tensor.data)
        return tensor

    def __getitem__(self, name: str) -> Tensor:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def __len__(self) -> int:
        return len(self._params)

    def names(self):
        return sorted(self._params)

    def items(self):
        for name in self.names():
            yield name, self._params[name]

    def tensors(self):
        return [self._params[name] for name in self.names()]

    def total_count(self) -> int:
        return sum(p.data.size for p in self._params.values())

    def zero_grads(self) -> None:
        for p in self._params.values():
            p.grad = None

    def fill_missing_grads(self) -> None:
        """Zero-fill grads of parameters the loss did not touch.

        With the attention readout the last layer's update MLP feeds no
        output, so its parameters legitimately receive no gradient; they
        must still satisfy the all-zeros contract after a backward pass.
        """
        for p in self._params.values():
            if p.grad is None:
                p.grad = np.zeros_like(p.data)

    def state_arrays(self) -> dict[str, np.ndarray]:
        """Copies of all parameter buffers, for checkpoints and checksums."""
        return {name: self._params[name].data.copy() for name in self.names()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, value in arrays.items():
            self._params[name].data[...] = value

    def save(self, path: str) -> None:
        """Final-model save as an npz archive keyed by parameter name."""
        np.savez(path, **self.state_arrays())

    def load(self, path: str) -> None:
        with np.load(path) as archive:
            self.load_arrays({name: archive[name] for name in archive.files})


def adam_step(store: ParamStore, lr: float = 1e-3, betas=(0.9, 0.999), eps: float = 1e-8) -> None:
    """One bias-corrected Adam update over every parameter; grads are cleared.

    Every parameter must carry a gradient (populated by backward); a missing
    gradient is a usage error and is reported by name.
    """
    b1, b2 = betas
    store.step_count += 1
    t = store.step_count
    for name in store.names():
        p = store._params[name]
        if p.grad is None:
            raise ValueError(f"parameter '{name}' has no gradient; run backward() before adam_step")
        g = p.grad
        m = store._m[name]
        v = store._v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        m_hat = m / (1.0 - b1 ** t)
        v_hat = v / (1.0 - b2 ** t)
        p.data -= lr * m_hat / (np.sqrt(v_hat) + eps)
        p.grad = None
