import numpy as np
import pytest

from uqcycle import tensor as T
from uqcycle.optim import Adam, AdamState, adam_step
from uqcycle.tensor import ShapeError, Tensor


def test_zero_gradient_leaves_params_unchanged():
    p = {"w": np.array([1.0, -2.0, 3.0])}
    out = adam_step(p, {"w": np.zeros(3)}, AdamState(), lr=0.1)
    np.testing.assert_array_equal(out["w"], p["w"])


def test_first_step_moves_by_lr():
    # bias-corrected m/sqrt(v) is exactly g/|g| on step one: 1 / (1 + eps)
    out = adam_step({"w": np.array([0.5])}, {"w": np.array([1.0])}, AdamState(), lr=0.1)
    np.testing.assert_allclose(out["w"], 0.5 - 0.1 / (1 + 1e-8), rtol=1e-12)


def test_hand_evaluated_second_step():
    st = AdamState()
    p = {"w": np.array([0.0])}
    p = adam_step(p, {"w": np.array([2.0])}, st, lr=0.01, beta1=0.9, beta2=0.999)
    p = adam_step(p, {"w": np.array([-1.0])}, st, lr=0.01, beta1=0.9, beta2=0.999)
    m = 0.9 * (0.1 * 2.0) + 0.1 * -1.0
    v = 0.999 * (0.001 * 4.0) + 0.001 * 1.0
    step2 = 0.01 * (m / (1 - 0.9**2)) / (np.sqrt(v / (1 - 0.999**2)) + 1e-8)
    np.testing.assert_allclose(p["w"], [-0.01 / (1 + 1e-8 / 2) - step2], rtol=1e-9)
    assert st.t == 2


def test_two_identical_steps_move_monotonically_against_gradient():
    st = AdamState()
    p0 = {"w": np.array([1.0, -1.0])}
    g = {"w": np.array([0.3, -4.0])}
    p1 = adam_step(p0, g, st, lr=0.05)
    p2 = adam_step(p1, g, st, lr=0.05)
    assert np.all(np.sign(p1["w"] - p0["w"]) == -np.sign(g["w"]))
    assert np.all(np.sign(p2["w"] - p1["w"]) == -np.sign(g["w"]))


def test_missing_grad_is_zero():
    out = adam_step({"w": np.ones(2)}, {}, AdamState(), lr=1.0)
    np.testing.assert_array_equal(out["w"], np.ones(2))


def test_shape_mismatch():
    with pytest.raises(ShapeError):
        adam_step({"w": np.ones(2)}, {"w": np.ones(3)}, AdamState(), lr=0.1)


def test_preserves_dtype():
    out = adam_step({"w": np.ones(2, np.float32)}, {"w": np.ones(2, np.float32)}, AdamState(), lr=0.1)
    assert out["w"].dtype == np.float32


def test_minimizes_quadratic():
    w = Tensor(np.array([3.0, -2.0]), requires_grad=True, dtype=np.float64)
    opt = Adam({"w": w}, lr=0.1, betas=(0.9, 0.999))
    for _ in range(500):
        opt.zero_grad()
        T.backward(T.sum(w * w))
        opt.step()
    np.testing.assert_allclose(w.data, 0.0, atol=1e-2)


def test_step_does_not_mutate_previous_arrays():
    w = Tensor(np.array([1.0]), requires_grad=True, dtype=np.float64)
    before = w.data
    opt = Adam({"w": w}, lr=0.1)
    T.backward(T.sum(w * 2.0))
    opt.step()
    assert before[0] == 1.0 and w.data is not before
