# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled BLAS-backed twin of kernels_numpy.

Same five entry points, same semantics; row-major GEMMs are expressed as
column-major calls on the transposed views. One dtype (float32 or float64)
per network; fused types generate both specializations.
"""
import numpy as np

from libc.math cimport tanh, tanhf, isfinite
from scipy.linalg.cython_blas cimport sgemm, dgemm, sgemv, dgemv

ctypedef fused real:
    float
    double

OUT_LINEAR = 0
OUT_TANH = 1

# activation codes for the per-layer workers
cdef int ACT_NONE = 0, ACT_RELU = 1, ACT_TANH = 2


cdef void _gemm_nn(real[:, ::1] A, real[:, ::1] W, real[:, ::1] C) noexcept nogil:
    # C (m,n) = A (m,k) @ W (k,n), row-major
    cdef int m = A.shape[0], k = A.shape[1], n = W.shape[1]
    cdef char cN = b'N'
    cdef float f1 = 1.0, f0 = 0.0
    cdef double d1 = 1.0, d0 = 0.0
    if real is float:
        sgemm(&cN, &cN, &n, &m, &k, &f1, <float*>&W[0, 0], &n,
              <float*>&A[0, 0], &k, &f0, <float*>&C[0, 0], &n)
    else:
        dgemm(&cN, &cN, &n, &m, &k, &d1, <double*>&W[0, 0], &n,
              <double*>&A[0, 0], &k, &d0, <double*>&C[0, 0], &n)


cdef void _gemm_at_b(real[:, ::1] A, real[:, ::1] D, real[:, ::1] gW) noexcept nogil:
    # gW (k,n) = A^T (k,m) @ D (m,n), row-major
    cdef int m = A.shape[0], k = A.shape[1], n = D.shape[1]
    cdef char cN = b'N', cT = b'T'
    cdef float f1 = 1.0, f0 = 0.0
    cdef double d1 = 1.0, d0 = 0.0
    if real is float:
        sgemm(&cN, &cT, &n, &k, &m, &f1, <float*>&D[0, 0], &n,
              <float*>&A[0, 0], &k, &f0, <float*>&gW[0, 0], &n)
    else:
        dgemm(&cN, &cT, &n, &k, &m, &d1, <double*>&D[0, 0], &n,
              <double*>&A[0, 0], &k, &d0, <double*>&gW[0, 0], &n)


cdef void _gemm_a_bt(real[:, ::1] D, real[:, ::1] W, real[:, ::1] dX) noexcept nogil:
    # dX (m,k) = D (m,n) @ W^T (n,k), row-major
    cdef int m = D.shape[0], n = D.shape[1], k = W.shape[0]
    cdef char cN = b'N', cT = b'T'
    cdef float f1 = 1.0, f0 = 0.0
    cdef double d1 = 1.0, d0 = 0.0
    if real is float:
        sgemm(&cT, &cN, &k, &m, &n, &f1, <float*>&W[0, 0], &n,
              <float*>&D[0, 0], &n, &f0, <float*>&dX[0, 0], &k)
    else:
        dgemm(&cT, &cN, &k, &m, &n, &d1, <double*>&W[0, 0], &n,
              <double*>&D[0, 0], &n, &d0, <double*>&dX[0, 0], &k)


def dense_forward(real[:, ::1] A, real[:, ::1] W, real[::1] b,
                  real[:, ::1] C, int act, double bound):
    cdef Py_ssize_t i, j, m = C.shape[0], n = C.shape[1]
    cdef real z
    with nogil:
        _gemm_nn(A, W, C)
        for i in range(m):
            for j in range(n):
                z = C[i, j] + b[j]
                if act == ACT_RELU:
                    if z < 0:
                        z = 0
                elif act == ACT_TANH:
                    if real is float:
                        z = <real>(bound * tanhf(z))
                    else:
                        z = <real>(bound * tanh(z))
                C[i, j] = z


def dense_forward_vec(real[:, ::1] W, real[::1] b, real[::1] x,
                      real[::1] y, int act, double bound):
    # y (n,) = x (k,) @ W (k,n) + b, then activation
    cdef int k = W.shape[0], n = W.shape[1], inc = 1
    cdef char cN = b'N'
    cdef float f1 = 1.0, f0 = 0.0
    cdef double d1 = 1.0, d0 = 0.0
    cdef Py_ssize_t j
    cdef real z
    with nogil:
        if real is float:
            sgemv(&cN, &n, &k, &f1, <float*>&W[0, 0], &n,
                  <float*>&x[0], &inc, &f0, <float*>&y[0], &inc)
        else:
            dgemv(&cN, &n, &k, &d1, <double*>&W[0, 0], &n,
                  <double*>&x[0], &inc, &d0, <double*>&y[0], &inc)
        for j in range(n):
            z = y[j] + b[j]
            if act == ACT_RELU:
                if z < 0:
                    z = 0
            elif act == ACT_TANH:
                if real is float:
                    z = <real>(bound * tanhf(z))
                else:
                    z = <real>(bound * tanh(z))
            y[j] = z


def tanh_grad_inplace(real[:, ::1] D, real[:, ::1] Y, double bound):
    # D *= d(bound*tanh(z))/dz, expressed through the output Y
    cdef Py_ssize_t i, j
    cdef double inv = 1.0 / bound
    with nogil:
        for i in range(D.shape[0]):
            for j in range(D.shape[1]):
                D[i, j] = <real>(D[i, j] * (bound - Y[i, j] * Y[i, j] * inv))


def relu_mask_inplace(real[:, ::1] D, real[:, ::1] H):
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(D.shape[0]):
            for j in range(D.shape[1]):
                if H[i, j] <= 0:
                    D[i, j] = 0


def dense_backward_gw(real[:, ::1] A, real[:, ::1] D,
                      real[:, ::1] gW, real[::1] gb):
    cdef Py_ssize_t i, j, m = D.shape[0], n = D.shape[1]
    cdef double acc
    with nogil:
        _gemm_at_b(A, D, gW)
        for j in range(n):
            acc = 0.0
            for i in range(m):
                acc += D[i, j]
            gb[j] = <real>acc


def dense_backward_dx(real[:, ::1] D, real[:, ::1] W, real[:, ::1] dX):
    with nogil:
        _gemm_a_bt(D, W, dX)


def sumsq(real[::1] g):
    cdef Py_ssize_t i
    cdef double s = 0.0
    with nogil:
        for i in range(g.shape[0]):
            s += <double>g[i] * <double>g[i]
    return s


def adam_apply(real[::1] p, real[::1] g, real[::1] m, real[::1] v,
               double lr, double b1, double b2, double eps,
               double bc1, double bc2):
    cdef Py_ssize_t i
    cdef double mi, vi, gi
    with nogil:
        for i in range(p.shape[0]):
            gi = g[i]
            mi = b1 * m[i] + (1.0 - b1) * gi
            vi = b2 * v[i] + (1.0 - b2) * gi * gi
            m[i] = <real>mi
            v[i] = <real>vi
            p[i] = <real>(p[i] - lr * (mi / bc1) / ((vi / bc2) ** 0.5 + eps))


def blend(real[::1] a, real[::1] b, double tau):
    cdef Py_ssize_t i
    with nogil:
        for i in range(a.shape[0]):
            a[i] = <real>((1.0 - tau) * a[i] + tau * b[i])


def forward_chain(list Ws, list bs, X, int out_kind, double bound):
    """Driver matching kernels_numpy.forward_chain."""
    acts = [X]
    cdef Py_ssize_t i, last = len(Ws) - 1
    for i in range(len(Ws)):
        A = acts[len(acts) - 1]
        W = Ws[i]
        C = np.empty((A.shape[0], W.shape[1]), dtype=A.dtype)
        act = ACT_RELU if i < last else (ACT_TANH if out_kind == OUT_TANH else ACT_NONE)
        dense_forward(A, W, bs[i], C, act, bound)
        acts.append(C)
    return acts


def backward_chain(list Ws, list acts, G, int out_kind, double bound,
                   bint want_dx=False):
    """Driver matching kernels_numpy.backward_chain."""
    cdef Py_ssize_t L = len(Ws)
    gWs = [None] * L
    gbs = [None] * L
    D = G
    cdef Py_ssize_t i
    for i in range(L - 1, -1, -1):
        if i == L - 1 and out_kind == OUT_TANH:
            D = D.copy()
            tanh_grad_inplace(D, acts[i + 1], bound)
        W = Ws[i]
        gW = np.empty_like(W)
        gb = np.empty(W.shape[1], dtype=D.dtype)
        dense_backward_gw(acts[i], D, gW, gb)
        gWs[i] = gW
        gbs[i] = gb
        if i > 0 or want_dx:
            dX = np.empty((D.shape[0], W.shape[0]), dtype=D.dtype)
            dense_backward_dx(D, W, dX)
            if i > 0:
                relu_mask_inplace(dX, acts[i])
            D = dX
    return gWs, gbs, (D if want_dx else None)


def forward_single(list Ws, list bs, x, int out_kind, double bound):
    """Driver matching kernels_numpy.forward_single."""
    h = x
    cdef Py_ssize_t i, last = len(Ws) - 1
    for i in range(len(Ws)):
        W = Ws[i]
        y = np.empty(W.shape[1], dtype=h.dtype)
        act = ACT_RELU if i < last else (ACT_TANH if out_kind == OUT_TANH else ACT_NONE)
        dense_forward_vec(W, bs[i], h, y, act, bound)
        h = y
    return h


def adam_update(list params, list grads, list m, list v, long t,
                double lr, double beta1, double beta2, double eps):
    """Driver matching kernels_numpy.adam_update."""
    cdef double gsq = 0.0, s
    for g in grads:
        s = sumsq(g.ravel())
        if not isfinite(s):
            return False, s
        gsq += s
    cdef double bc1 = 1.0 - beta1 ** t
    cdef double bc2 = 1.0 - beta2 ** t
    for p, g, mi, vi in zip(params, grads, m, v):
        adam_apply(p.ravel(), g.ravel(), mi.ravel(), vi.ravel(),
                   lr, beta1, beta2, eps, bc1, bc2)
    return True, gsq


def soft_blend(list targets, list onlines, double tau):
    """Driver matching kernels_numpy.soft_blend."""
    for a, b in zip(targets, onlines):
        blend(a.ravel(), b.ravel(), tau)
