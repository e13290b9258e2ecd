"""Sine-activated multilayer perceptron: forward pass, Jacobians, gradients.

Layer ``l`` (1-based) computes ``z_l = W_l h_{l-1} + b_l`` and, except for
the last layer, ``h_l = sin(z_l)``.  The first layer's frequency scale lives
inside ``W_1`` (drawn with half-width ``omega0 / n0``), so the forward map
itself carries no extra multiplier.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class SirenNet:
    weights: list
    biases: list
    omega0: float = 1.0
    scheme: str = "custom"
    seed: int | None = None

    def __post_init__(self):
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64).reshape(-1) for b in self.biases]
        if len(self.weights) != len(self.biases) or len(self.weights) < 1:
            raise ValueError("need one bias per weight matrix and at least one layer")
        fan_in = self.weights[0].shape[1]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or w.shape[1] != fan_in or b.shape[0] != w.shape[0]:
                raise ValueError(f"layer {i + 1}: incompatible shapes {w.shape}, {b.shape}")
            fan_in = w.shape[0]

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def n0(self) -> int:
        return self.weights[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.weights[-1].shape[0]

    @property
    def widths(self) -> list[int]:
        return [self.n0] + [w.shape[0] for w in self.weights]

    @property
    def num_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "SirenNet":
        return SirenNet([w.copy() for w in self.weights], [b.copy() for b in self.biases],
                        self.omega0, self.scheme, self.seed)

    def __call__(self, x) -> np.ndarray:
        return forward(self, x).output

    def flat_params(self) -> np.ndarray:
        """All parameters, layer by layer, weights (row-major) then bias."""
        return np.concatenate([np.concatenate([w.ravel(), b]) for w, b in zip(self.weights, self.biases)])

    def set_flat_params(self, theta) -> None:
        theta = np.asarray(theta, dtype=np.float64)
        if theta.shape != (self.num_params,):
            raise ValueError(f"expected {self.num_params} parameters, got {theta.shape}")
        pos = 0
        for w, b in zip(self.weights, self.biases):
            w[...] = theta[pos:pos + w.size].reshape(w.shape)
            pos += w.size
            b[...] = theta[pos:pos + b.size]
            pos += b.size

    def to_dict(self) -> dict:
        return {
            "omega0": self.omega0,
            "scheme": self.scheme,
            "seed": self.seed,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SirenNet":
        return cls(d["weights"], d["biases"], d.get("omega0", 1.0), d.get("scheme", "custom"), d.get("seed"))

    def to_json(self) -> str:
        # json writes floats with repr, which round-trips exactly
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "SirenNet":
        return cls.from_dict(json.loads(text))


@dataclass
class ForwardTrace:
    """Cached activations of a batched forward pass.

    ``inputs`` has shape (B, n0); ``pre[l]`` and ``post[l]`` (0-based layer
    index) have shape (B, n_l).  ``post[-1]`` is the linear output.
    """

    inputs: np.ndarray
    pre: list = field(default_factory=list)
    post: list = field(default_factory=list)

    @property
    def output(self) -> np.ndarray:
        return self.post[-1]

    def hidden(self, ell: int) -> np.ndarray:
        """Input to layer ``ell`` (1-based): ``h_{ell-1}``."""
        return self.inputs if ell == 1 else self.post[ell - 2]


def _batch(net: SirenNet, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 0:
        x = x.reshape(1, 1)
    elif x.ndim == 1:
        # a 1-D array is a batch of scalars for scalar-input nets, else one sample
        x = x[:, None] if net.n0 == 1 else x[None, :]
    if x.ndim != 2 or x.shape[1] != net.n0:
        raise ValueError(f"input shape {x.shape} does not match n0={net.n0}")
    return x


def forward(net: SirenNet, x) -> ForwardTrace:
    h = _batch(net, x)
    trace = ForwardTrace(h)
    last = net.depth - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w.T + b
        h = z if i == last else np.sin(z)
        trace.pre.append(z)
        trace.post.append(h)
    return trace


def layer_jacobian(net: SirenNet, trace: ForwardTrace, ell: int, sample: int = 0) -> np.ndarray:
    """``d h_ell / d h_{ell-1}`` for one sample; ``ell`` is 1-based."""
    if not 1 <= ell <= net.depth:
        raise ValueError(f"layer index {ell} outside 1..{net.depth}")
    w = net.weights[ell - 1]
    if ell == net.depth:
        return w.copy()
    return np.cos(trace.pre[ell - 1][sample])[:, None] * w


def layer_jacobians_batched(net: SirenNet, trace: ForwardTrace, ell: int) -> np.ndarray:
    """Stack of layer Jacobians, shape (B, n_ell, n_{ell-1})."""
    w = net.weights[ell - 1]
    if ell == net.depth:
        return np.broadcast_to(w, (trace.inputs.shape[0],) + w.shape).copy()
    return np.cos(trace.pre[ell - 1])[:, :, None] * w[None]


def end_to_end_jacobian(net: SirenNet, trace: ForwardTrace, sample: int = 0) -> np.ndarray:
    """``d h_{L-1} / d h_1 = J_{L-1} ... J_2`` for one sample, shape (N, N).

    Excludes the first-layer factor and the linear readout.
    """
    if net.depth < 3:
        raise ValueError(f"end-to-end Jacobian needs depth >= 3, got {net.depth}")
    j = layer_jacobian(net, trace, 2, sample)
    for ell in range(3, net.depth):
        j = layer_jacobian(net, trace, ell, sample) @ j
    return j


def end_to_end_jacobians_batched(net: SirenNet, trace: ForwardTrace) -> np.ndarray:
    """:func:`end_to_end_jacobian` for every sample of the trace, shape (B, N, N)."""
    if net.depth < 3:
        raise ValueError(f"end-to-end Jacobian needs depth >= 3, got {net.depth}")
    j = layer_jacobians_batched(net, trace, 2)
    for ell in range(3, net.depth):
        j = layer_jacobians_batched(net, trace, ell) @ j
    return j


def input_gradient(net: SirenNet, trace: ForwardTrace, sample: int = 0) -> np.ndarray:
    """``d output / d x`` for one sample of the trace, shape (d_out, n0)."""
    j = layer_jacobian(net, trace, 1, sample)
    for ell in range(2, net.depth + 1):
        j = layer_jacobian(net, trace, ell, sample) @ j
    return j


def input_gradients(net: SirenNet, x) -> np.ndarray:
    """Batched ``d output / d x``, shape (B, d_out, n0), by back-propagation."""
    trace = forward(net, x)
    b = trace.inputs.shape[0]
    g = np.broadcast_to(net.weights[-1], (b,) + net.weights[-1].shape)
    for ell in range(net.depth - 1, 0, -1):
        g = (g * np.cos(trace.pre[ell - 1])[:, None, :]) @ net.weights[ell - 1]
    return np.asarray(g)


def backward_deltas(net: SirenNet, trace: ForwardTrace, upstream) -> list:
    """``dLoss/dz_l`` for every layer, given ``dLoss/d output`` (B, d_out)."""
    delta = np.asarray(upstream, dtype=np.float64).reshape(trace.output.shape)
    deltas = [None] * net.depth
    deltas[-1] = delta
    for ell in range(net.depth - 1, 0, -1):
        delta = (delta @ net.weights[ell]) * np.cos(trace.pre[ell - 1])
        deltas[ell - 1] = delta
    return deltas


def param_gradient(net: SirenNet, trace: ForwardTrace, upstream):
    """Gradients of a loss w.r.t. all weights and biases, summed over the batch.

    ``upstream`` is ``dLoss/d output`` with shape (B, d_out).  Returns
    ``(grad_weights, grad_biases)`` matching ``net.weights``/``net.biases``.
    """
    deltas = backward_deltas(net, trace, upstream)
    gw = [d.T @ trace.hidden(ell + 1) for ell, d in enumerate(deltas)]
    gb = [d.sum(axis=0) for d in deltas]
    return gw, gb


def output_param_jacobian(net: SirenNet, x) -> np.ndarray:
    """Per-sample ``d output / d theta`` for a scalar-output net, shape (B, P).

    Parameter order matches :meth:`SirenNet.flat_params`.  These rows are the
    tangent features whose Gram matrix is the empirical NTK.
    """
    if net.d_out != 1:
        raise ValueError("output_param_jacobian needs a scalar-output net")
    trace = forward(net, x)
    b = trace.inputs.shape[0]
    deltas = backward_deltas(net, trace, np.ones((b, 1)))
    blocks = []
    for ell, d in enumerate(deltas):
        h = trace.hidden(ell + 1)
        blocks.append((d[:, :, None] * h[:, None, :]).reshape(b, -1))
        blocks.append(d)
    return np.concatenate(blocks, axis=1)


def ntk_feature(net: SirenNet, x) -> np.ndarray:
    """Tangent feature ``d output / d theta`` at a single point, shape (P,)."""
    feats = output_param_jacobian(net, x)
    if feats.shape[0] != 1:
        raise ValueError("ntk_feature takes a single point")
    return feats[0]
