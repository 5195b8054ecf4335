import numpy as np
import pytest

from latentaxes import mlp
from latentaxes.errors import DimensionMismatch


def test_init_deterministic():
    p1 = mlp.init_params(3, [8, 16, 8])
    p2 = mlp.init_params(3, [8, 16, 8])
    for w1, w2 in zip(p1.weights, p2.weights):
        np.testing.assert_array_equal(w1, w2)


def test_init_he_scale():
    p = mlp.init_params(0, [512, 512])
    assert p.weights[0].std() == pytest.approx(np.sqrt(2 / 512), rel=0.1)


def test_init_biases_zero():
    p = mlp.init_params(0, [4, 8, 2])
    for b in p.biases:
        np.testing.assert_array_equal(b, 0.0)


def test_forward_zero_params():
    p = mlp.init_params(0, [3, 5, 2])
    for w in p.weights:
        w[:] = 0.0
    y, _ = mlp.mlp_forward(p, np.ones((4, 3)))
    np.testing.assert_array_equal(y, 0.0)


def test_forward_single_identity_layer():
    p = mlp.MlpParams([np.eye(3)], [np.zeros(3)])
    x = np.random.default_rng(0).normal(size=(5, 3))
    y, _ = mlp.mlp_forward(p, x)
    np.testing.assert_array_equal(y, x)


def test_leaky_relu_propagates():
    # 1 -> 1 -> 1 net, both weights 1: hidden applies the leaky slope
    p = mlp.MlpParams([np.array([[1.0]]), np.array([[1.0]])],
                      [np.zeros(1), np.zeros(1)])
    y, _ = mlp.mlp_forward(p, np.array([[-1.0]]), leaky_slope=0.01)
    assert y[0, 0] == pytest.approx(-0.01)


def test_forward_dim_check():
    p = mlp.init_params(0, [3, 2])
    with pytest.raises(DimensionMismatch):
        mlp.mlp_forward(p, np.ones((4, 5)))


def test_backward_matches_finite_differences():
    rng = np.random.default_rng(1)
    p = mlp.init_params(7, [4, 6, 3])
    x = rng.normal(size=(5, 4))
    target = rng.normal(size=(5, 3))

    def loss(params):
        y, _ = mlp.mlp_forward(params, x)
        return np.sum((y - target) ** 2)

    y, cache = mlp.mlp_forward(p, x)
    gw, gb, gx = mlp.mlp_backward(p, cache, 2 * (y - target))

    h = 1e-6
    for li in range(len(p.weights)):
        for idx in [(0, 0), (1, 2)]:
            orig = p.weights[li][idx]
            p.weights[li][idx] = orig + h
            up = loss(p)
            p.weights[li][idx] = orig - h
            down = loss(p)
            p.weights[li][idx] = orig
            assert gw[li][idx] == pytest.approx((up - down) / (2 * h), rel=1e-5)


def test_adam_zero_grad_no_change():
    p = mlp.init_params(0, [3, 3])
    before = p.copy()
    state = mlp.adam_init(p)
    zeros_w = [np.zeros_like(w) for w in p.weights]
    zeros_b = [np.zeros_like(b) for b in p.biases]
    mlp.adam_step(p, zeros_w, zeros_b, state, lr=0.1)
    np.testing.assert_array_equal(p.weights[0], before.weights[0])


def test_adam_first_step_is_signed_lr():
    p = mlp.init_params(0, [2, 2])
    before = p.copy()
    state = mlp.adam_init(p)
    g = np.array([[5.0, -0.003], [100.0, 0.5]])
    mlp.adam_step(p, [g], [np.zeros(2)], state, lr=0.01)
    step = before.weights[0] - p.weights[0]
    # bias-corrected first step: lr * g / (|g| + eps) ~ lr * sign(g)
    np.testing.assert_allclose(step, 0.01 * np.sign(g), rtol=1e-4)


def test_adam_deterministic():
    results = []
    for _ in range(2):
        p = mlp.init_params(5, [3, 4, 2])
        state = mlp.adam_init(p)
        g_w = [np.full_like(w, 0.3) for w in p.weights]
        g_b = [np.full_like(b, -0.2) for b in p.biases]
        for _ in range(10):
            mlp.adam_step(p, g_w, g_b, state, lr=1e-3)
        results.append(p)
    np.testing.assert_array_equal(results[0].weights[1], results[1].weights[1])
