"""Pure-numpy reference kernels for the dense-network hot paths.

This module and the compiled extension (_kernels) export the same five
functions with identical semantics; the backend module picks one at import
time. Shapes follow the row-major convention: activations are (batch, dim),
weights are (in_dim, out_dim).
"""
from __future__ import annotations

import numpy as np

OUT_LINEAR = 0
OUT_TANH = 1  # output = bound * tanh(z)


def forward_chain(Ws, bs, X, out_kind, bound):
    """Run the dense chain, returning every activation.

    Parameters
    ----------
    Ws, bs : list of ndarray
        Per-layer weights (in, out) and biases (out,), one dtype throughout.
    X : ndarray, shape (n, d0)
        Input batch.
    out_kind : int
        OUT_LINEAR or OUT_TANH.
    bound : float
        Output scale for OUT_TANH; ignored for OUT_LINEAR.

    Returns
    -------
    list of ndarray
        [X, h1, ..., y]; hidden layers are rectified in place.
    """
    acts = [X]
    last = len(Ws) - 1
    for i in range(len(Ws)):
        Z = acts[-1] @ Ws[i]
        Z += bs[i]
        if i < last:
            np.maximum(Z, 0.0, out=Z)
        elif out_kind == OUT_TANH:
            np.tanh(Z, out=Z)
            Z *= bound
        acts.append(Z)
    return acts


def backward_chain(Ws, acts, G, out_kind, bound, want_dx=False):
    """Reverse-mode gradients of forward_chain.

    Parameters
    ----------
    Ws : list of ndarray
        Layer weights.
    acts : list of ndarray
        Activations as returned by forward_chain.
    G : ndarray, shape (n, d_out)
        Gradient of the objective with respect to the chain output.
    want_dx : bool
        Also propagate the gradient to the input (needed for dQ/da).

    Returns
    -------
    (gWs, gbs, gX)
        Parameter gradients, and the input gradient or None.
    """
    L = len(Ws)
    gWs = [None] * L
    gbs = [None] * L
    D = G
    for i in range(L - 1, -1, -1):
        if i == L - 1 and out_kind == OUT_TANH:
            Y = acts[i + 1]
            # d(bound*tanh(z))/dz = bound - y^2/bound
            D = D * (bound - Y * Y * (1.0 / bound))
        gWs[i] = acts[i].T @ D
        gbs[i] = D.sum(axis=0)
        if i > 0:
            D = D @ Ws[i].T
            D *= acts[i] > 0.0
        elif want_dx:
            D = D @ Ws[0].T
    return gWs, gbs, (D if want_dx else None)


def forward_single(Ws, bs, x, out_kind, bound):
    """Forward pass for a single 1D input; returns a 1D output."""
    h = x
    last = len(Ws) - 1
    for i in range(len(Ws)):
        h = h @ Ws[i] + bs[i]
        if i < last:
            np.maximum(h, 0.0, out=h)
        elif out_kind == OUT_TANH:
            np.tanh(h, out=h)
            h *= bound
    return h


def adam_update(params, grads, m, v, t, lr, beta1, beta2, eps):
    """One bias-corrected adaptive-moment step, in place.

    Returns (ok, grad_sumsq). When any gradient is non-finite nothing is
    mutated and ok is False; the caller decides how to log the incident.
    """
    gsq = 0.0
    for g in grads:
        gr = g.ravel()
        s = float(gr @ gr)
        if not np.isfinite(s):
            return False, s
        gsq += s
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t
    for p, g, mi, vi in zip(params, grads, m, v):
        mi *= beta1
        mi += (1.0 - beta1) * g
        vi *= beta2
        vi += (1.0 - beta2) * np.square(g)
        denom = np.sqrt(vi / bc2)
        denom += eps
        p -= (lr / bc1) * mi / denom
    return True, gsq


def soft_blend(targets, onlines, tau):
    """target <- tau*online + (1-tau)*target for every parameter pair."""
    for a, b in zip(targets, onlines):
        a *= 1.0 - tau
        a += tau * b
