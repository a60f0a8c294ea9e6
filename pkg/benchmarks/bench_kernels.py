"""Timing comparison of the numpy and compiled kernel backends.

Each scenario mirrors a hot path from training or rollout: batched critic
and actor chains at the training batch size, the single-observation actor
forward used for action selection, the adaptive-moment update, and the
target soft blend. Backends are checked for agreement on the benchmark
inputs before timing, then timed as median-of-repeats microseconds per
call.

Run from the repository root:

    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --batch 100 --dtype float64
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from advped.nn.backend import OUT_LINEAR, OUT_TANH, get_backend

ACTOR_DIMS = (8, 512, 256, 1)
CRITIC_DIMS = (9, 512, 256, 1)
ACTION_BOUND = math.pi / 2.0


def make_net(dims, rng, dtype):
    """Glorot-scaled weights and zero biases for a dense chain."""
    Ws, bs = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        lim = math.sqrt(6.0 / (fan_in + fan_out))
        Ws.append(rng.uniform(-lim, lim,
                              size=(fan_in, fan_out)).astype(dtype))
        bs.append(np.zeros(fan_out, dtype=dtype))
    return Ws, bs


def median_us(fn, repeats, number):
    """Median over repeats of the per-call time for number calls."""
    fn()  # warmup outside the timed region
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        times.append((time.perf_counter() - t0) / number)
    times.sort()
    return times[len(times) // 2] * 1e6


def build_scenarios(batch, dtype, rng):
    """Return (name, callable-factory) pairs; factories take a kernels
    module and produce the zero-argument function to time."""
    aW, ab = make_net(ACTOR_DIMS, rng, dtype)
    cW, cb = make_net(CRITIC_DIMS, rng, dtype)
    X_a = rng.standard_normal((batch, ACTOR_DIMS[0])).astype(dtype)
    X_c = rng.standard_normal((batch, CRITIC_DIMS[0])).astype(dtype)
    x1 = rng.standard_normal(ACTOR_DIMS[0]).astype(dtype)
    G_a = rng.standard_normal((batch, 1)).astype(dtype)

    def actor_grads(k):
        acts = k.forward_chain(aW, ab, X_a, OUT_TANH, ACTION_BOUND)
        return k.backward_chain(aW, acts, G_a, OUT_TANH, ACTION_BOUND,
                                want_dx=True)

    gWs, gbs, _ = actor_grads(get_backend("numpy")[0])
    params = aW + ab
    grads = gWs + gbs
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    targets = [p.copy() for p in params]

    return [
        ("critic forward (batch)", lambda k: lambda: k.forward_chain(
            cW, cb, X_c, OUT_LINEAR, 0.0)),
        ("actor forward+backward (batch)", lambda k: lambda: actor_grads(k)),
        ("actor forward (single obs)", lambda k: lambda: k.forward_single(
            aW, ab, x1, OUT_TANH, ACTION_BOUND)),
        ("adam update (actor params)", lambda k: lambda: k.adam_update(
            params, grads, m, v, 10, 1e-12, 0.9, 0.999, 1e-8)),
        ("target soft blend", lambda k: lambda: k.soft_blend(
            targets, params, 0.005)),
    ]


def check_agreement(batch, dtype, rng):
    """Fail fast if the two backends disagree on the benchmark inputs."""
    kn, _ = get_backend("numpy")
    kc, _ = get_backend("cython")
    rtol = 1e-12 if dtype == np.float64 else 3e-5
    aW, ab = make_net(ACTOR_DIMS, rng, dtype)
    X = rng.standard_normal((batch, ACTOR_DIMS[0])).astype(dtype)
    G = rng.standard_normal((batch, 1)).astype(dtype)
    an = kn.forward_chain(aW, ab, X, OUT_TANH, ACTION_BOUND)
    ac = kc.forward_chain(aW, ab, X, OUT_TANH, ACTION_BOUND)
    np.testing.assert_allclose(ac[-1], an[-1], rtol=rtol, atol=rtol)
    gn = kn.backward_chain(aW, an, G, OUT_TANH, ACTION_BOUND, want_dx=True)
    gc = kc.backward_chain(aW, ac, G, OUT_TANH, ACTION_BOUND, want_dx=True)
    scale = max(1.0, float(np.abs(gn[0][0]).max()))
    np.testing.assert_allclose(gc[0][0], gn[0][0], rtol=rtol,
                               atol=rtol * scale)
    np.testing.assert_allclose(gc[2], gn[2], rtol=rtol, atol=rtol * scale)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=1000,
                        help="training batch size (default 1000)")
    parser.add_argument("--repeats", type=int, default=9,
                        help="timing repeats; median is reported")
    parser.add_argument("--number", type=int, default=20,
                        help="calls per repeat")
    parser.add_argument("--dtype", choices=["float32", "float64"],
                        default="float32")
    args = parser.parse_args(argv)
    dtype = np.dtype(args.dtype).type

    try:
        get_backend("cython")
    except ImportError:
        print("compiled extension unavailable; nothing to compare "
              "(reinstall with a C toolchain)")
        return 1

    rng = np.random.default_rng(0)
    check_agreement(args.batch, dtype, rng)
    scenarios = build_scenarios(args.batch, dtype, rng)

    name_w = max(len(s[0]) for s in scenarios)
    print(f"batch={args.batch} dtype={args.dtype} "
          f"median of {args.repeats} x {args.number} calls")
    print(f"{'scenario':<{name_w}}  {'numpy us':>10}  {'cython us':>10}  "
          f"{'speedup':>7}")
    for name, factory in scenarios:
        row = {}
        for backend in ("numpy", "cython"):
            k, _ = get_backend(backend)
            row[backend] = median_us(factory(k), args.repeats, args.number)
        ratio = row["numpy"] / row["cython"]
        print(f"{name:<{name_w}}  {row['numpy']:>10.1f}  "
              f"{row['cython']:>10.1f}  {ratio:>6.2f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
