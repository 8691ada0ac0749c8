import numpy as np
import pytest

from mshgnn import tensor as T
from mshgnn.optim import ParamStore, adam_step, glorot_init
from mshgnn.rng import make_rng
from mshgnn.tensor import Tape, backward


def test_adam_first_step_moves_by_lr():
    store = ParamStore()
    x = store.add("x", np.array([1.0]))
    with Tape() as tape:
        backward(T.sum_all(T.mul(x, x)), tape)
    adam_step(store, lr=0.1)
    # bias-corrected first step: m_hat = g, v_hat = g^2, step = lr * g/|g|
    assert abs(x.data[0] - 0.9) < 1e-8


def test_zero_gradient_leaves_parameter_unchanged():
    store = ParamStore()
    x = store.add("x", np.array([2.5]))
    x.grad = np.zeros(1)
    adam_step(store, lr=0.1)
    assert x.data[0] == 2.5


def test_registration_order_does_not_matter():
    results = []
    for names in (("a", "b"), ("b", "a")):
        store = ParamStore()
        params = {n: store.add(n, np.array([1.0 if n == "a" else -2.0])) for n in names}
        with Tape() as tape:
            loss = T.add(T.sum_all(T.mul(params["a"], params["a"])),
                         T.sum_all(T.mul(params["b"], params["b"])))
            backward(loss, tape)
        adam_step(store, lr=0.05)
        results.append((params["a"].data.copy(), params["b"].data.copy()))
    assert np.array_equal(results[0][0], results[1][0])
    assert np.array_equal(results[0][1], results[1][1])


def test_missing_grad_names_the_parameter():
    store = ParamStore()
    store.add("w.orphan", np.ones(2))
    with pytest.raises(ValueError, match="w.orphan"):
        adam_step(store)


def test_duplicate_name_rejected():
    store = ParamStore()
    store.add("w", np.ones(1))
    with pytest.raises(ValueError, match="already registered"):
        store.add("w", np.ones(1))


def test_iteration_is_lexicographic():
    store = ParamStore()
    for name in ("zeta", "alpha", "mid"):
        store.add(name, np.ones(1))
    assert store.names() == ["alpha", "mid", "zeta"]


def test_moment_buffers_match_shapes():
    store = ParamStore()
    p = store.add("w", np.ones((3, 4)))
    assert store._m["w"].shape == p.data.shape
    assert store._v["w"].shape == p.data.shape
    assert store.total_count() == 12


def test_save_load_round_trip(tmp_path):
    store = ParamStore()
    store.add("layer.weight", np.arange(6.0).reshape(2, 3))
    store.add("layer.bias", np.array([1.5, -0.5, 0.0]))
    path = str(tmp_path / "model.npz")
    store.save(path)
    other = ParamStore()
    other.add("layer.weight", np.zeros((2, 3)))
    other.add("layer.bias", np.zeros(3))
    other.load(path)
    assert np.array_equal(other["layer.weight"].data, np.arange(6.0).reshape(2, 3))
    assert np.array_equal(other["layer.bias"].data, [1.5, -0.5, 0.0])


def test_fill_missing_grads_zero_fills():
    store = ParamStore()
    p = store.add("unused", np.ones((2, 2)))
    store.fill_missing_grads()
    assert np.array_equal(p.grad, np.zeros((2, 2)))
    adam_step(store)  # zero grad: no movement
    assert np.array_equal(p.data, np.ones((2, 2)))


class TestGlorot:
    def test_bound_for_4x4(self):
        t = glorot_init((4, 4), make_rng(0))
        bound = np.sqrt(6.0 / 8.0)
        assert np.all(np.abs(t.data) <= bound)

    def test_same_seed_identical(self):
        a = glorot_init((5, 3), make_rng(42))
        b = glorot_init((5, 3), make_rng(42))
        assert np.array_equal(a.data, b.data)

    def test_different_seeds_differ(self):
        a = glorot_init((5, 3), make_rng(1))
        b = glorot_init((5, 3), make_rng(2))
        assert not np.array_equal(a.data, b.data)

    def test_non_2d_rejected(self):
        with pytest.raises(ValueError, match="2-D"):
            glorot_init((4,), make_rng(0))
