import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import central_diff, max_rel_err
from eocsiren.initialization import init_network
from eocsiren.network import (
    SirenNet,
    end_to_end_jacobian,
    end_to_end_jacobians_batched,
    forward,
    input_gradient,
    input_gradients,
    layer_jacobian,
    ntk_feature,
    output_param_jacobian,
    param_gradient,
)


@pytest.fixture
def net():
    return init_network("sigma1", 3.0, 2, 12, 5, seed=7, d_out=2)


def tiny_net():
    return SirenNet([[[2.0]], [[3.0]]], [[0.5], [-1.0]])


class TestForward:
    def test_hand_value(self):
        assert tiny_net()(1.0)[0, 0] == pytest.approx(3 * math.sin(2.5) - 1, abs=1e-15)

    def test_hand_two_layer_hidden(self):
        net = SirenNet([[[1.0], [-1.0]], [[1.0, 1.0]], [[2.0]]], [[0.0, 0.0], [0.25], [0.0]])
        # sin(x) + sin(-x) = 0, so layer 2 sees only its bias
        assert net(0.7)[0, 0] == pytest.approx(2 * math.sin(0.25), abs=1e-15)

    def test_last_layer_linear(self, net):
        tr = forward(net, np.zeros((3, 2)) + 0.3)
        np.testing.assert_allclose(tr.output, tr.post[-2] @ net.weights[-1].T + net.biases[-1], atol=1e-14)
        np.testing.assert_array_equal(tr.pre[-1], tr.post[-1])

    def test_hidden_sine(self, net):
        tr = forward(net, [[0.1, -0.2]])
        for z, h in zip(tr.pre[:-1], tr.post[:-1]):
            np.testing.assert_array_equal(h, np.sin(z))

    def test_batch_independent(self, net):
        x = np.random.default_rng(0).uniform(-1, 1, (6, 2))
        full = net(x)
        for i in range(6):
            np.testing.assert_allclose(net(x[i]), full[i : i + 1], atol=1e-14)

    def test_scalar_batch(self):
        out = init_network("sitzmann", 1.0, 1, 8, 3, seed=0)(np.linspace(-1, 1, 5))
        assert out.shape == (5, 1)

    def test_bad_shapes(self, net):
        with pytest.raises(ValueError):
            net(np.zeros((2, 3)))
        with pytest.raises(ValueError):
            SirenNet([np.zeros((3, 2)), np.zeros((1, 4))], [np.zeros(3), np.zeros(1)])

    def test_shape_properties(self, net):
        assert net.depth == 5 and net.n0 == 2 and net.d_out == 2
        assert net.widths == [2, 12, 12, 12, 12, 2]
        assert net.num_params == net.flat_params().size == 3 * 12 + 3 * 13 * 12 + 13 * 2


class TestParams:
    def test_flat_roundtrip(self, net):
        theta = net.flat_params()
        other = net.copy()
        other.set_flat_params(theta * 2)
        np.testing.assert_array_equal(other.flat_params(), 2 * theta)
        np.testing.assert_array_equal(net.flat_params(), theta)

    def test_set_wrong_size(self, net):
        with pytest.raises(ValueError):
            net.set_flat_params(np.zeros(3))

    def test_json_roundtrip(self, net):
        back = SirenNet.from_json(net.to_json())
        np.testing.assert_array_equal(back.flat_params(), net.flat_params())
        assert (back.omega0, back.scheme, back.seed) == (net.omega0, net.scheme, net.seed)
        x = np.array([[0.3, -0.4]])
        np.testing.assert_array_equal(back(x), net(x))


def _params_fd(net, x, upstream):
    theta0 = net.flat_params()

    def loss(theta):
        n = net.copy()
        n.set_flat_params(theta)
        return float(np.sum(upstream * n(x)))

    return central_diff(loss, theta0)


class TestGradients:
    def test_param_gradient_fd(self, net):
        rng = np.random.default_rng(1)
        x = rng.uniform(-1, 1, (4, 2))
        up = rng.normal(size=(4, 2))
        gw, gb = param_gradient(net, forward(net, x), up)
        analytic = np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(gw, gb)])
        assert max_rel_err(analytic, _params_fd(net, x, up)) < 1e-6

    def test_input_gradient_fd(self, net):
        x = np.array([0.2, -0.6])
        g = input_gradient(net, forward(net, x[None]))
        num = central_diff(lambda t: net(t)[0], x)
        np.testing.assert_allclose(g, num, rtol=1e-6, atol=1e-8)

    def test_input_gradients_batched_agree(self, net):
        x = np.random.default_rng(2).uniform(-1, 1, (5, 2))
        tr = forward(net, x)
        batched = input_gradients(net, x)
        for i in range(5):
            np.testing.assert_allclose(batched[i], input_gradient(net, tr, i), atol=1e-12)

    def test_hand_gradient(self):
        net = tiny_net()
        g = input_gradient(net, forward(net, [[1.0]]))
        assert g[0, 0] == pytest.approx(6 * math.cos(2.5), abs=1e-15)

    def test_ntk_feature_matches_param_gradient(self, net):
        single = init_network("sitzmann", 2.0, 2, 6, 4, seed=1)
        x = np.array([[0.5, 0.1]])
        gw, gb = param_gradient(single, forward(single, x), np.ones((1, 1)))
        flat = np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(gw, gb)])
        np.testing.assert_allclose(ntk_feature(single, x), flat, atol=1e-14)
        np.testing.assert_allclose(flat, _params_fd(single, x, np.ones((1, 1))), rtol=1e-6, atol=1e-9)

    def test_output_param_jacobian_needs_scalar(self, net):
        with pytest.raises(ValueError):
            output_param_jacobian(net, np.zeros((1, 2)))


class TestJacobian:
    def test_layer_jacobian_fd(self, net):
        x = np.array([[0.4, 0.9]])
        tr = forward(net, x)
        for ell in (2, 3, 4):
            h_prev = tr.hidden(ell)[0]

            def layer(h):
                return np.sin(net.weights[ell - 1] @ h + net.biases[ell - 1])

            num = np.column_stack([central_diff(lambda t: layer(h_prev + t[0] * e), np.zeros(1))[:, 0]
                                   for e in np.eye(h_prev.size)])
            np.testing.assert_allclose(layer_jacobian(net, tr, ell), num, rtol=1e-6, atol=1e-8)

    def test_chain_consistency(self, net):
        """Product of the hidden Jacobians, sandwiched by the end layers, is d out / d x."""
        x = np.random.default_rng(3).uniform(-1, 1, (3, 2))
        tr = forward(net, x)
        for i in range(3):
            full = layer_jacobian(net, tr, net.depth, i) @ end_to_end_jacobian(net, tr, i) @ layer_jacobian(net, tr, 1, i)
            np.testing.assert_allclose(full, input_gradient(net, tr, i), atol=1e-12)

    def test_batched_agree(self, net):
        x = np.random.default_rng(4).uniform(-1, 1, (4, 2))
        tr = forward(net, x)
        stack = end_to_end_jacobians_batched(net, tr)
        for i in range(4):
            np.testing.assert_allclose(stack[i], end_to_end_jacobian(net, tr, i), atol=1e-13)

    def test_depth_three_is_single_layer(self):
        net = init_network("proposed-sigma0", 1.0, 1, 5, 3, seed=0)
        tr = forward(net, [[0.3]])
        np.testing.assert_array_equal(end_to_end_jacobian(net, tr), layer_jacobian(net, tr, 2))

    def test_depth_two_rejected(self):
        with pytest.raises(ValueError):
            end_to_end_jacobian(tiny_net(), forward(tiny_net(), [[0.0]]))

    def test_bad_layer_index(self, net):
        with pytest.raises(ValueError):
            layer_jacobian(net, forward(net, [[0.0, 0.0]]), 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2, 2), st.floats(-2, 2))
def test_chain_rule_property(seed, a, b):
    net = init_network("sitzmann", 2.0, 2, 6, 4, seed=seed)
    tr = forward(net, [[a, b]])
    full = layer_jacobian(net, tr, 4) @ end_to_end_jacobian(net, tr) @ layer_jacobian(net, tr, 1)
    np.testing.assert_allclose(full, input_gradient(net, tr), atol=1e-12)
