import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uqcycle import tensor as T
from uqcycle.layers import (
    Conv2d,
    Method,
    StochasticConfig,
    VariationalWeight,
    dropconnect_forward,
    dropout_forward,
    flipout_forward,
    rademacher,
)
from uqcycle.tensor import ShapeError, Tensor

N = 2000  # the full 10 000-draw versions live in the acceptance suite


def within_3se(samples: np.ndarray, target: np.ndarray) -> bool:
    se = samples.std(axis=0, ddof=1) / np.sqrt(len(samples))
    dev = np.abs(samples.mean(axis=0) - target)
    # zero-variance elements must be exact
    return bool(np.all((dev <= 3 * se) | ((se == 0) & (dev == 0))))


class TestStochasticConfig:
    def test_defaults(self):
        assert StochasticConfig(Method.MC_DROPOUT).drop_prob == 0.5
        assert StochasticConfig(Method.MC_DROPCONNECT).drop_prob == 0.05
        assert StochasticConfig(Method.MC_DROPOUT).samples == 16
        ens = StochasticConfig(Method.ENSEMBLE)
        assert ens.ensemble_size == 5 and ens.samples == 5

    def test_ensemble_m_must_match(self):
        with pytest.raises(ValueError):
            StochasticConfig(Method.ENSEMBLE, ensemble_size=5, samples=4)

    @pytest.mark.parametrize("p", [1.0, -0.1, 1.5])
    def test_bad_probability(self, p):
        with pytest.raises(ValueError):
            StochasticConfig(Method.MC_DROPOUT, drop_prob=p)

    def test_bad_m(self):
        with pytest.raises(ValueError):
            StochasticConfig(Method.FLIPOUT, samples=0)

    def test_string_method_accepted(self):
        assert StochasticConfig("FLIPOUT").method is Method.FLIPOUT


class TestDropout:
    def test_p_zero_is_identity(self):
        x = Tensor(np.arange(6.0).reshape(2, 3))
        assert dropout_forward(x, 0.0, np.random.default_rng(0)) is x

    def test_p_one_rejected(self):
        with pytest.raises(ValueError):
            dropout_forward(Tensor(np.ones(3)), 1.0, np.random.default_rng(0))

    def test_survivors_scaled(self):
        y = dropout_forward(Tensor(np.ones(1000), dtype=np.float64), 0.5, np.random.default_rng(1)).data
        assert set(np.unique(y)) <= {0.0, 2.0}

    def test_expectation(self):
        x = np.linspace(-1, 1, 12)
        # every row of the batch is an independent draw
        y = dropout_forward(Tensor(np.tile(x, (N, 1)), dtype=np.float64), 0.5, np.random.default_rng(2)).data
        assert within_3se(y, x)

    def test_seeded_mask_reproducible(self):
        x = Tensor(np.ones((4, 4)))
        a = dropout_forward(x, 0.3, np.random.default_rng(5)).data
        b = dropout_forward(x, 0.3, np.random.default_rng(5)).data
        assert a.tobytes() == b.tobytes()

    def test_gradient_flows_through_mask(self):
        x = Tensor(np.ones(50), requires_grad=True, dtype=np.float64)
        y = dropout_forward(x, 0.5, np.random.default_rng(3))
        T.backward(T.sum(y))
        np.testing.assert_array_equal(x.grad, y.data)


class TestDropConnect:
    def setup_method(self):
        rng = np.random.default_rng(7)
        self.x = Tensor(rng.standard_normal((3, 5)), dtype=np.float64)
        self.w = Tensor(rng.standard_normal((4, 5)), dtype=np.float64)
        self.b = Tensor(rng.standard_normal(4), dtype=np.float64)
        self.det = self.x.data @ self.w.data.T + self.b.data

    def test_p_zero_deterministic(self):
        y = dropconnect_forward(self.x, self.w, 0.0, np.random.default_rng(0), self.b)
        np.testing.assert_allclose(y.data, self.det, rtol=1e-12)

    def test_zero_weights_give_zero(self):
        z = Tensor(np.zeros((4, 5)), dtype=np.float64)
        y = dropconnect_forward(self.x, z, 0.05, np.random.default_rng(0))
        np.testing.assert_array_equal(y.data, 0.0)

    def test_expectation(self):
        rng = np.random.default_rng(11)
        ys = np.stack([dropconnect_forward(self.x, self.w, 0.05, rng, self.b).data for _ in range(N)])
        assert within_3se(ys, self.det)

    def test_conv_path(self):
        x = Tensor(np.ones((1, 2, 5, 5)), dtype=np.float64)
        w = Tensor(np.ones((3, 2, 3, 3)), dtype=np.float64)
        y = dropconnect_forward(x, w, 0.0, np.random.default_rng(0), pad=1)
        np.testing.assert_allclose(y.data, T.conv2d(x, w, pad=1).data)


class TestFlipout:
    def setup_method(self):
        rng = np.random.default_rng(13)
        self.mean = rng.standard_normal((3, 4))
        self.x = Tensor(rng.standard_normal((2, 4)), dtype=np.float64)
        self.det = self.x.data @ self.mean.T

    def test_zero_variance_limit(self):
        vw = VariationalWeight(self.mean, -30.0)
        y = flipout_forward(self.x, vw, np.random.default_rng(0))
        np.testing.assert_allclose(y.data, self.det, atol=1e-6)

    def test_expectation(self):
        vw = VariationalWeight(self.mean, np.log(0.25))
        rng = np.random.default_rng(17)
        ys = np.stack([flipout_forward(self.x, vw, rng).data for _ in range(N)])
        assert within_3se(ys, self.det)

    def test_examples_get_different_perturbations(self):
        vw = VariationalWeight(self.mean, 0.0)
        x = Tensor(np.ones((2, 4)), dtype=np.float64)
        rng = np.random.default_rng(19)
        differs = [not np.allclose(*flipout_forward(x, vw, rng).data) for _ in range(50)]
        assert any(differs)

    def test_conv_1x1_matches_dense(self):
        vw = VariationalWeight(self.mean.reshape(3, 4, 1, 1), -2.0)
        x4 = Tensor(self.x.data.reshape(2, 4, 1, 1), dtype=np.float64)
        vw2 = VariationalWeight(self.mean, -2.0)
        a = flipout_forward(x4, vw, np.random.default_rng(4)).data.reshape(2, 3)
        b = flipout_forward(self.x, vw2, np.random.default_rng(4)).data
        np.testing.assert_allclose(a, b, rtol=1e-12)

    def test_rejects_3x3(self):
        vw = VariationalWeight(np.zeros((2, 2, 3, 3)), -6.0)
        with pytest.raises(ShapeError):
            flipout_forward(Tensor(np.ones((1, 2, 4, 4))), vw, np.random.default_rng(0))

    def test_log_var_receives_gradient(self):
        vw = VariationalWeight(self.mean, -1.0)
        y = flipout_forward(self.x, vw, np.random.default_rng(2))
        T.backward(T.sum(y * y))
        assert vw.log_var.grad is not None and np.any(vw.log_var.grad != 0)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=20, deadline=None)
    def test_rademacher_values(self, seed):
        r = rademacher(np.random.default_rng(seed), (64,))
        assert set(np.unique(r)) <= {-1.0, 1.0}

    def test_rademacher_zero_mean(self):
        r = rademacher(np.random.default_rng(23), (10000,), np.float64)
        assert abs(r.mean()) <= 3 * r.std(ddof=1) / 100


class TestConv2dLayer:
    @pytest.mark.parametrize("kind", ["plain", "dropconnect", "variational"])
    def test_disabled_noise_reduces_to_deterministic(self, kind):
        rng = np.random.default_rng(0)
        layer = Conv2d(2, 3, 3, rng, kind=kind, p=0.0, init_logvar=-60.0, dtype=np.float64)
        ref = Conv2d(2, 3, 3, np.random.default_rng(0), dtype=np.float64)
        x = Tensor(np.random.default_rng(1).standard_normal((1, 2, 6, 6)), dtype=np.float64)
        np.testing.assert_allclose(layer(x, np.random.default_rng(5)).data, ref(x).data, atol=1e-10)

    def test_variational_has_logvar_param(self):
        layer = Conv2d(2, 3, 1, np.random.default_rng(0), kind="variational")
        assert set(layer.parameters("m.")) == {"m.weight", "m.bias", "m.weight_logvar"}

    def test_stochastic_layer_needs_rng(self):
        layer = Conv2d(1, 1, 1, np.random.default_rng(0), kind="dropconnect", p=0.1)
        with pytest.raises(ValueError):
            layer(Tensor(np.ones((1, 1, 2, 2))))

    def test_seed_determines_output(self):
        layer = Conv2d(2, 2, 1, np.random.default_rng(0), kind="variational", init_logvar=-1.0)
        x = Tensor(np.ones((1, 2, 3, 3)))
        a = layer(x, np.random.default_rng(9)).data
        b = layer(x, np.random.default_rng(9)).data
        c = layer(x, np.random.default_rng(10)).data
        assert a.tobytes() == b.tobytes() and a.tobytes() != c.tobytes()
