"""Parity tests between the numpy kernels and the compiled extension.

Both backends export the same five entry points; every test drives the two
modules with identical inputs and compares results. float64 runs should
agree to accumulation-order noise; float32 runs tolerate the extension's
double-precision accumulators.
"""

import os
import subprocess
import sys

import numpy as np
import pytest

from advped.nn import backend
from advped.nn import kernels_numpy as knp

kcy = pytest.importorskip("advped.nn._kernels",
                          reason="compiled extension not built")

SHAPES = [[3, 8, 1], [8, 512, 256, 1], [9, 32, 16, 1], [5, 7, 7, 7, 2]]


def rtol_for(dtype):
    return 1e-12 if dtype == np.float64 else 3e-5


def make_chain(rng, dims, dtype):
    Ws = [np.ascontiguousarray(rng.normal(0, 0.5, (i, o)), dtype=dtype)
          for i, o in zip(dims[:-1], dims[1:])]
    bs = [np.ascontiguousarray(rng.normal(0, 0.1, o), dtype=dtype)
          for o in dims[1:]]
    return Ws, bs


class TestForwardParity:
    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    @pytest.mark.parametrize("out_kind", [knp.OUT_LINEAR, knp.OUT_TANH])
    def test_forward_chain(self, dtype, out_kind):
        rng = np.random.default_rng(11)
        for dims in SHAPES:
            for n in (1, 4, 33):
                Ws, bs = make_chain(rng, dims, dtype)
                X = np.ascontiguousarray(rng.normal(0, 1, (n, dims[0])),
                                         dtype=dtype)
                a_np = knp.forward_chain(Ws, bs, X.copy(), out_kind, 2.5)
                a_cy = kcy.forward_chain(Ws, bs, X.copy(), out_kind, 2.5)
                assert len(a_np) == len(a_cy) == len(dims)
                rt = rtol_for(dtype)
                for u, w in zip(a_np, a_cy):
                    np.testing.assert_allclose(u, w, rtol=rt, atol=rt)

    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    @pytest.mark.parametrize("out_kind", [knp.OUT_LINEAR, knp.OUT_TANH])
    def test_forward_single(self, dtype, out_kind):
        rng = np.random.default_rng(12)
        for dims in SHAPES:
            Ws, bs = make_chain(rng, dims, dtype)
            x = np.ascontiguousarray(rng.normal(0, 1, dims[0]), dtype=dtype)
            y_np = knp.forward_single(Ws, bs, x.copy(), out_kind, 1.5)
            y_cy = kcy.forward_single(Ws, bs, x.copy(), out_kind, 1.5)
            assert y_np.shape == y_cy.shape == (dims[-1],)
            np.testing.assert_allclose(y_np, y_cy, rtol=rtol_for(dtype),
                                       atol=0)

    def test_single_matches_batch_row(self):
        rng = np.random.default_rng(13)
        Ws, bs = make_chain(rng, [8, 32, 1], np.float64)
        X = rng.normal(0, 1, (5, 8))
        acts = kcy.forward_chain(Ws, bs, X, knp.OUT_TANH, 2.0)
        for i in range(5):
            y = kcy.forward_single(Ws, bs, X[i].copy(), knp.OUT_TANH, 2.0)
            np.testing.assert_allclose(y, acts[-1][i], rtol=1e-12)


class TestBackwardParity:
    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    @pytest.mark.parametrize("out_kind", [knp.OUT_LINEAR, knp.OUT_TANH])
    @pytest.mark.parametrize("want_dx", [False, True])
    def test_backward_chain(self, dtype, out_kind, want_dx):
        rng = np.random.default_rng(21)
        for dims in SHAPES:
            Ws, bs = make_chain(rng, dims, dtype)
            X = np.ascontiguousarray(rng.normal(0, 1, (17, dims[0])),
                                     dtype=dtype)
            G = np.ascontiguousarray(rng.normal(0, 1, (17, dims[-1])),
                                     dtype=dtype)
            acts = knp.forward_chain(Ws, bs, X, out_kind, 2.5)
            gW_np, gb_np, dx_np = knp.backward_chain(Ws, acts, G.copy(),
                                                     out_kind, 2.5, want_dx)
            gW_cy, gb_cy, dx_cy = kcy.backward_chain(Ws, acts, G.copy(),
                                                     out_kind, 2.5, want_dx)
            rt = rtol_for(dtype)
            scale = max(float(np.max(np.abs(g))) for g in gW_np)
            for u, w in zip(gW_np + gb_np, gW_cy + gb_cy):
                np.testing.assert_allclose(u, w, rtol=rt, atol=rt * scale)
            if want_dx:
                np.testing.assert_allclose(dx_np, dx_cy, rtol=rt,
                                           atol=rt * scale)
            else:
                assert dx_np is None and dx_cy is None

    def test_backward_does_not_mutate_acts(self):
        """The tanh-output gradient scaling must not write into the
        activation list the caller still owns."""
        rng = np.random.default_rng(22)
        Ws, bs = make_chain(rng, [4, 8, 1], np.float64)
        X = rng.normal(0, 1, (6, 4))
        G = np.ones((6, 1))
        acts = kcy.forward_chain(Ws, bs, X, knp.OUT_TANH, 2.0)
        saved = [a.copy() for a in acts]
        kcy.backward_chain(Ws, acts, G, knp.OUT_TANH, 2.0, True)
        for a, s in zip(acts, saved):
            np.testing.assert_array_equal(a, s)


class TestAdamParity:
    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    def test_multi_step(self, dtype):
        rng = np.random.default_rng(31)
        shapes = [(8, 16), (16,), (16, 1), (1,)]
        p_np = [np.ascontiguousarray(rng.normal(0, 1, s), dtype=dtype)
                for s in shapes]
        p_cy = [p.copy() for p in p_np]
        m_np = [np.zeros(s, dtype=dtype) for s in shapes]
        v_np = [np.zeros(s, dtype=dtype) for s in shapes]
        m_cy = [np.zeros(s, dtype=dtype) for s in shapes]
        v_cy = [np.zeros(s, dtype=dtype) for s in shapes]
        rt = 1e-12 if dtype == np.float64 else 2e-4
        for t in range(1, 6):
            grads = [np.ascontiguousarray(rng.normal(0, 1, s), dtype=dtype)
                     for s in shapes]
            ok_np, g_np = knp.adam_update(p_np, [g.copy() for g in grads],
                                          m_np, v_np, t, 1e-3, 0.9, 0.999,
                                          1e-8)
            ok_cy, g_cy = kcy.adam_update(p_cy, [g.copy() for g in grads],
                                          m_cy, v_cy, t, 1e-3, 0.9, 0.999,
                                          1e-8)
            assert ok_np and ok_cy
            assert g_cy == pytest.approx(g_np, rel=1e-5)
        for u, w in zip(p_np + m_np + v_np, p_cy + m_cy + v_cy):
            np.testing.assert_allclose(u, w, rtol=rt, atol=rt)

    @pytest.mark.parametrize("mod", [knp, kcy], ids=["numpy", "cython"])
    def test_nonfinite_skips(self, mod):
        p = [np.ones(4)]
        m = [np.zeros(4)]
        v = [np.zeros(4)]
        g = [np.array([1.0, np.nan, 0.0, 0.0])]
        ok, _ = mod.adam_update(p, g, m, v, 1, 1e-3, 0.9, 0.999, 1e-8)
        assert not ok
        np.testing.assert_array_equal(p[0], np.ones(4))
        assert not m[0].any() and not v[0].any()


class TestSoftBlendParity:
    @pytest.mark.parametrize("dtype", [np.float32, np.float64])
    def test_blend(self, dtype):
        rng = np.random.default_rng(41)
        shapes = [(8, 16), (16,), (3, 3)]
        t_np = [np.ascontiguousarray(rng.normal(0, 1, s), dtype=dtype)
                for s in shapes]
        t_cy = [a.copy() for a in t_np]
        on = [np.ascontiguousarray(rng.normal(0, 1, s), dtype=dtype)
              for s in shapes]
        knp.soft_blend(t_np, on, 0.005)
        kcy.soft_blend(t_cy, on, 0.005)
        rt = rtol_for(dtype)
        for u, w in zip(t_np, t_cy):
            np.testing.assert_allclose(u, w, rtol=rt, atol=rt)


class TestSelection:
    def test_constants_match(self):
        assert knp.OUT_LINEAR == kcy.OUT_LINEAR == backend.OUT_LINEAR
        assert knp.OUT_TANH == kcy.OUT_TANH == backend.OUT_TANH

    def test_get_backend_named(self):
        mod, name = backend.get_backend("numpy")
        assert mod is knp and name == "numpy"
        mod, name = backend.get_backend("cython")
        assert mod is kcy and name == "cython"

    def test_get_backend_default_is_import_pick(self):
        mod, name = backend.get_backend(None)
        assert name == backend.BACKEND_NAME
        assert mod is backend.kernels

    def test_get_backend_unknown(self):
        with pytest.raises(ValueError):
            backend.get_backend("fortran")

    @pytest.mark.parametrize("forced", ["numpy", "cython"])
    def test_env_forcing(self, forced):
        env = dict(os.environ, ADVPED_BACKEND=forced)
        out = subprocess.run(
            [sys.executable, "-c",
             "from advped.nn.backend import BACKEND_NAME; print(BACKEND_NAME)"],
            env=env, capture_output=True, text=True)
        assert out.returncode == 0
        assert out.stdout.strip() == forced

    def test_env_invalid_rejected(self):
        env = dict(os.environ, ADVPED_BACKEND="fortran")
        out = subprocess.run(
            [sys.executable, "-c", "import advped.nn.backend"],
            env=env, capture_output=True, text=True)
        assert out.returncode != 0
        assert "ADVPED_BACKEND" in out.stderr
