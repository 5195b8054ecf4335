"""Plain-numpy MLP with LeakyReLU hidden layers and a hand-written backward
pass, plus an Adam optimizer. Everything is deterministic given the seed."""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFinite


@dataclass
class MlpParams:
    weights: list  # weights[i]: (sizes[i], sizes[i+1])
    biases: list   # biases[i]: (sizes[i+1],)

    @property
    def layer_sizes(self):
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights],
                        [b.copy() for b in self.biases])


def init_params(seed: int, layer_sizes) -> MlpParams:
    """He-style init: weights ~ N(0, 2/fan_in), biases zero."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        std = np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, std, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def leaky_relu(x, slope):
    return np.where(x > 0, x, slope * x)


def mlp_forward(params: MlpParams, x: np.ndarray, leaky_slope: float = 0.01):
    """Forward pass. Hidden layers use LeakyReLU; the output layer is linear.

    Returns (output, cache); the cache holds the input and every
    pre-activation, enough to run the backward pass.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.weights[0].shape[0]:
        raise DimensionMismatch(
            f"input dim {x.shape[-1]} != {params.weights[0].shape[0]}")
    pre = []          # pre-activation of every layer
    acts = [x]        # post-activation inputs to every layer
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if i == last else leaky_relu(z, leaky_slope)
        if i < last:
            acts.append(h)
    if not np.isfinite(h).all():
        raise NonFinite("non-finite activation in forward pass")
    return h, (acts, pre)


def mlp_backward(params: MlpParams, cache, grad_out: np.ndarray,
                 leaky_slope: float = 0.01):
    """Backpropagate grad_out (dL/d output) through the network.

    Returns (grad_weights, grad_biases, grad_input).
    """
    acts, pre = cache
    grad_w = [None] * len(params.weights)
    grad_b = [None] * len(params.biases)
    g = np.asarray(grad_out, dtype=np.float64)
    last = len(params.weights) - 1
    for i in range(last, -1, -1):
        if i != last:
            g = g * np.where(pre[i] > 0, 1.0, leaky_slope)
        grad_w[i] = acts[i].T @ g
        grad_b[i] = g.sum(axis=0)
        g = g @ params.weights[i].T
    return grad_w, grad_b, g


@dataclass
class AdamState:
    m_w: list
    v_w: list
    m_b: list
    v_b: list
    t: int = 0


def adam_init(params: MlpParams) -> AdamState:
    return AdamState(
        m_w=[np.zeros_like(w) for w in params.weights],
        v_w=[np.zeros_like(w) for w in params.weights],
        m_b=[np.zeros_like(b) for b in params.biases],
        v_b=[np.zeros_like(b) for b in params.biases],
    )


def adam_step(params: MlpParams, grad_w, grad_b, state: AdamState,
              lr: float, beta1: float = 0.9, beta2: float = 0.999,
              eps: float = 1e-8) -> None:
    """Standard Adam update with bias correction, in place."""
    state.t += 1
    t = state.t
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for i in range(len(params.weights)):
        state.m_w[i] = beta1 * state.m_w[i] + (1 - beta1) * grad_w[i]
        state.v_w[i] = beta2 * state.v_w[i] + (1 - beta2) * grad_w[i] ** 2
        params.weights[i] -= lr * (state.m_w[i] / c1) / (np.sqrt(state.v_w[i] / c2) + eps)
        state.m_b[i] = beta1 * state.m_b[i] + (1 - beta1) * grad_b[i]
        state.v_b[i] = beta2 * state.v_b[i] + (1 - beta2) * grad_b[i] ** 2
        params.biases[i] -= lr * (state.m_b[i] / c1) / (np.sqrt(state.v_b[i] / c2) + eps)
