import numpy as np
import pytest

from mshgnn import tensor as T
from mshgnn.tensor import Tape, Tensor, backward


def finite_difference(loss_fn, tensor, step=1e-5):
    """Central-difference gradient of scalar loss_fn() wrt tensor.data."""
    fd = np.zeros_like(tensor.data)
    flat = tensor.data.ravel()
    out = fd.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        f_plus = loss_fn()
        flat[i] = orig - step
        f_minus = loss_fn()
        flat[i] = orig
        out[i] = (f_plus - f_minus) / (2.0 * step)
    return fd


def rel_error(measured, expected):
    return np.linalg.norm(np.asarray(measured) - np.asarray(expected)) / max(
        np.linalg.norm(np.asarray(expected)), 1e-12)


def grad_check(make_loss, tensors, tol=1e-4, step=1e-5):
    """Backward() gradients vs central differences for each tensor.

    make_loss() must rebuild the loss from current tensor data and return a
    scalar Tensor; it is called fresh for every probe so finite differences
    see the perturbed values.
    """
    for t in tensors:
        t.grad = None
    with Tape() as tape:
        loss = make_loss()
        backward(loss, tape)
    for t in tensors:
        analytic = t.grad if t.grad is not None else np.zeros_like(t.data)
        fd = finite_difference(lambda: float(make_loss().data), t, step)
        err = rel_error(analytic, fd)
        assert err < tol, f"gradient mismatch: rel error {err:.3e} (tol {tol})"


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
