"""Adaptive-moment optimizer state and step."""
from __future__ import annotations

import logging

import numpy as np

from .backend import kernels

log = logging.getLogger("advped.nn")


class AdamState:
    """First/second moment accumulators mirroring a parameter list."""

    def __init__(self, params, beta1=0.9, beta2=0.999, eps=1e-8):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0
        self.beta1 = float(beta1)
        self.beta2 = float(beta2)
        self.eps = float(eps)


def adam_step(params, grads, state: AdamState, lr: float) -> float | None:
    """One bias-corrected update, in place.

    Returns the gradient squared-norm, or None when the step was skipped
    because a gradient was non-finite (the incident is logged, not raised).
    """
    if len(grads) != len(params):
        raise ValueError("params/grads length mismatch")
    state.t += 1
    ok, gsq = kernels.adam_update(params, grads, state.m, state.v, state.t,
                                  float(lr), state.beta1, state.beta2,
                                  state.eps)
    if not ok:
        state.t -= 1  # skipped steps do not advance bias correction
        log.warning("adam_step skipped: non-finite gradient (sumsq=%r)", gsq)
        return None
    return gsq
