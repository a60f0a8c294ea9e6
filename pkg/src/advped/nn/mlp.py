"""Minimal dense feed-forward networks with exact analytic gradients.

Rectified-linear hidden layers; the output is either linear (critic) or a
bounded-saturating tanh scaled to +-action_bound (actor). Weights follow the
uniform fan-based initialization in +-sqrt(6/(fan_in+fan_out)); biases start
at zero.
"""
from __future__ import annotations

import math

import numpy as np

from .backend import OUT_LINEAR, OUT_TANH, kernels

LINEAR = "linear"
TANH_SCALED = "tanh_scaled"
_OUT_KINDS = {LINEAR: OUT_LINEAR, TANH_SCALED: OUT_TANH}


class Mlp:
    """A dense network: weight list, bias list, and the output activation.

    Parameters
    ----------
    layer_dims : sequence of int
        At least two entries, e.g. [8, 512, 256, 1].
    output_activation : str
        "linear" or "tanh_scaled".
    action_bound : float
        Output scale when output_activation is "tanh_scaled".
    rng : numpy.random.Generator, optional
        Source of initial weights; mutually exclusive with seed.
    seed : int, optional
        Convenience seed when no rng is supplied.
    dtype : numpy dtype
        float32 (default) or float64 for all parameters.
    """

    def __init__(self, layer_dims, output_activation=LINEAR, *,
                 action_bound=1.0, rng=None, seed=None, dtype=np.float32):
        layer_dims = [int(d) for d in layer_dims]
        if len(layer_dims) < 2 or any(d < 1 for d in layer_dims):
            raise ValueError(f"invalid layer_dims: {layer_dims}")
        if output_activation not in _OUT_KINDS:
            raise ValueError(f"unknown output_activation: {output_activation!r}")
        if rng is None:
            rng = np.random.default_rng(seed)
        self.layer_dims = layer_dims
        self.output_activation = output_activation
        self.action_bound = float(action_bound)
        self.dtype = np.dtype(dtype)
        self._out_kind = _OUT_KINDS[output_activation]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(layer_dims[:-1], layer_dims[1:]):
            limit = math.sqrt(6.0 / (fan_in + fan_out))
            w = rng.uniform(-limit, limit, size=(fan_in, fan_out))
            self.weights.append(np.ascontiguousarray(w, dtype=self.dtype))
            self.biases.append(np.zeros(fan_out, dtype=self.dtype))

    # -- parameter plumbing -------------------------------------------------

    def parameters(self):
        """Weights then biases, in declaration order."""
        return list(self.weights) + list(self.biases)

    def copy_from(self, other: "Mlp") -> None:
        if other.layer_dims != self.layer_dims:
            raise ValueError("layer_dims mismatch")
        for dst, src in zip(self.parameters(), other.parameters()):
            dst[...] = src

    def clone(self) -> "Mlp":
        twin = Mlp(self.layer_dims, self.output_activation,
                   action_bound=self.action_bound, seed=0, dtype=self.dtype)
        twin.copy_from(self)
        return twin

    # -- forward / backward -------------------------------------------------

    def _as_batch(self, x):
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 1:
            if x.shape[0] != self.layer_dims[0]:
                raise ValueError(f"input length {x.shape[0]} != {self.layer_dims[0]}")
            return np.ascontiguousarray(x[None, :]), True
        if x.ndim != 2 or x.shape[1] != self.layer_dims[0]:
            raise ValueError(f"bad input shape {x.shape} for dims {self.layer_dims}")
        return np.ascontiguousarray(x), False

    def forward(self, x):
        """Forward pass; accepts (d0,) or (n, d0), returns matching rank."""
        xb, squeeze = self._as_batch(x)
        if squeeze:
            y = kernels.forward_single(self.weights, self.biases,
                                       np.ascontiguousarray(xb[0]),
                                       self._out_kind, self.action_bound)
            return y
        return kernels.forward_chain(self.weights, self.biases, xb,
                                     self._out_kind, self.action_bound)[-1]

    def forward_cached(self, x):
        """Forward pass on a batch, returning all activations for backward."""
        xb, _ = self._as_batch(x)
        return kernels.forward_chain(self.weights, self.biases, xb,
                                     self._out_kind, self.action_bound)

    def backward_from(self, acts, output_grad, want_input_grad=False):
        """Backpropagate through cached activations.

        Returns (weight_grads, bias_grads, input_grad_or_None).
        """
        g = np.ascontiguousarray(output_grad, dtype=self.dtype)
        if g.ndim == 1:
            g = g[None, :]
        if g.shape != acts[-1].shape:
            raise ValueError(f"output_grad shape {g.shape} != {acts[-1].shape}")
        return kernels.backward_chain(self.weights, acts, g, self._out_kind,
                                      self.action_bound, want_input_grad)

    def all_finite(self) -> bool:
        return all(np.isfinite(p).all() for p in self.parameters())


# -- module-level operation forms -------------------------------------------

def init(layer_dims, output_activation=LINEAR, seed=None, *,
         action_bound=1.0, dtype=np.float32) -> Mlp:
    """Deterministically initialize a network from a seed."""
    return Mlp(layer_dims, output_activation, action_bound=action_bound,
               seed=seed, dtype=dtype)


def forward(net: Mlp, x):
    return net.forward(x)


def backward(net: Mlp, x, output_grad):
    """Gradients of net at input x: ((weight_grads, bias_grads), input_grad)."""
    acts = net.forward_cached(x)
    gws, gbs, gx = net.backward_from(acts, output_grad, want_input_grad=True)
    return (gws, gbs), gx


def soft_update(target: Mlp, online: Mlp, tau: float) -> Mlp:
    """target <- tau*online + (1-tau)*target, in place; returns target."""
    if target.layer_dims != online.layer_dims:
        raise ValueError("layer_dims mismatch")
    if not 0.0 <= tau <= 1.0:
        raise ValueError("tau must be in [0, 1]")
    kernels.soft_blend(target.parameters(), online.parameters(), tau)
    return target
