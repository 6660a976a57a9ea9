# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled numerical kernels; see ``_pykernels`` for the reference versions."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, sqrt, fmax
from libc.stdlib cimport malloc, free

from .errors import NonConvergence

cnp.import_array()


cdef int _proj(const double* x, const double* w, Py_ssize_t n, double budget,
               int max_iter, double* out, double* lam_out) noexcept nogil:
    """Bisection bracket then closed form on the active set; -1 on failure."""
    cdef Py_ssize_t s
    cdef double lo = x[0], hi = x[0], wsum = 0.0, mid, acc, wa, wx, lam
    cdef int it, inside
    for s in range(n):
        if x[s] < lo:
            lo = x[s]
        if x[s] > hi:
            hi = x[s]
        wsum += w[s]
    lo -= budget / wsum
    for it in range(max_iter + 1):
        inside = 0
        for s in range(n):
            if x[s] > lo and x[s] < hi:
                inside = 1
                break
        if inside == 0 or hi - lo <= 4e-16 * fmax(1.0, fmax(fabs(lo), fabs(hi))):
            wa = 0.0
            wx = 0.0
            for s in range(n):
                if x[s] >= hi:
                    wa += w[s]
                    wx += w[s] * x[s]
            if wa > 0:
                lam = (wx - budget) / wa
                for s in range(n):
                    out[s] = fmax(0.0, x[s] - lam)
                lam_out[0] = lam
                return it
        if it == max_iter:
            break
        mid = 0.5 * (lo + hi)
        acc = 0.0
        for s in range(n):
            if x[s] > mid:
                acc += w[s] * (x[s] - mid)
        if acc > budget:
            lo = mid
        else:
            hi = mid
    return -1


cdef int _warm_lambda(const double* y, const double* w, Py_ssize_t n,
                      double budget, double lam0, double* scratch,
                      double* lam_out) noexcept nogil:
    cdef Py_ssize_t s
    cdef double lam = lam0, wa, wx, new
    cdef int it
    for it in range(100):
        wa = 0.0
        wx = 0.0
        for s in range(n):
            if y[s] > lam:
                wa += w[s]
                wx += w[s] * y[s]
        if wa <= 0:
            break
        new = (wx - budget) / wa
        if new == lam:
            lam_out[0] = lam
            return 0
        lam = new
    return _proj(y, w, n, budget, 200, scratch, lam_out)


def project(x, w, double budget, int max_iter=200):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    out = np.empty(xv.shape[0])
    cdef double[::1] ov = out
    cdef double lam = 0.0
    cdef int it
    with nogil:
        it = _proj(&xv[0], &wv[0], xv.shape[0], budget, max_iter, &ov[0], &lam)
    if it < 0:
        raise NonConvergence(
            f"projection bisection exceeded {max_iter} iterations")
    return out, lam, it


cdef void _affine_row(const double[:, ::1] P, const double[:, :, ::1] g,
                      Py_ssize_t i, double tau, double* y) noexcept nogil:
    cdef Py_ssize_t s, j, N = P.shape[0], S = P.shape[1]
    cdef double tot
    for s in range(S):
        tot = 1.0
        for j in range(N):
            if j != i:
                tot += g[s, i, j] * P[j, s]
        y[s] = P[i, s] - tau * (P[i, s] + tot / g[s, i, i])


def t_affine(const double[:, ::1] P, const double[:, :, ::1] gains,
             const double[::1] w, const double[::1] budgets, double tau,
             double[:, ::1] out):
    cdef Py_ssize_t N = P.shape[0], S = P.shape[1], i, s
    cdef double lam, acc = 0.0, d
    cdef int bad = 0
    cdef double* y = <double*> malloc(S * sizeof(double))
    try:
        with nogil:
            for i in range(N):
                _affine_row(P, gains, i, tau, y)
                if _proj(y, &w[0], S, budgets[i], 200, &out[i, 0], &lam) < 0:
                    bad = 1
                    break
                for s in range(S):
                    d = P[i, s] - out[i, s]
                    acc += d * d
    finally:
        free(y)
    if bad:
        raise NonConvergence("projection bisection exceeded 200 iterations")
    return sqrt(acc)


def t_partial(const double[:, ::1] P, const Py_ssize_t[:, ::1] idx,
              const double[:, :, ::1] gains, const double[::1] pi,
              const double[:, ::1] wvis, const double[::1] budgets, double tau,
              double[:, ::1] out):
    cdef Py_ssize_t N = P.shape[0], nv = P.shape[1], S = idx.shape[1]
    cdef Py_ssize_t i, j, s, v
    cdef double tot, lam, acc = 0.0, d
    cdef int bad = 0
    cdef double* grad = <double*> malloc(N * nv * sizeof(double))
    cdef double* y = <double*> malloc(nv * sizeof(double))
    try:
        with nogil:
            for i in range(N * nv):
                grad[i] = 0.0
            for s in range(S):
                for i in range(N):
                    tot = 1.0
                    for j in range(N):
                        tot += gains[s, i, j] * P[j, idx[j, s]]
                    grad[i * nv + idx[i, s]] += pi[s] * gains[s, i, i] / tot
            for i in range(N):
                for v in range(nv):
                    if wvis[i, v] > 0:
                        y[v] = P[i, v] + tau * grad[i * nv + v] / (nv * wvis[i, v])
                    else:
                        y[v] = P[i, v]
                if _proj(y, &wvis[i, 0], nv, budgets[i], 200, &out[i, 0], &lam) < 0:
                    bad = 1
                    break
                for v in range(nv):
                    d = P[i, v] - out[i, v]
                    acc += d * d
    finally:
        free(grad)
        free(y)
    if bad:
        raise NonConvergence("projection bisection exceeded 200 iterations")
    return sqrt(acc)


def fd_grad_affine(const double[:, ::1] P, Py_ssize_t user,
                   const double[:, :, ::1] gains, const double[::1] w,
                   const double[::1] budgets, double tau, double rel_step,
                   double[::1] out):
    cdef Py_ssize_t N = P.shape[0], S = P.shape[1], i, j, s, h
    cdef double lam, step, dy, old, diff, rp, r
    cdef int bad = 0
    cdef double* Y = <double*> malloc(N * S * sizeof(double))
    cdef double* R = <double*> malloc(N * S * sizeof(double))
    cdef double* T = <double*> malloc(S * sizeof(double))
    cdef double* lams = <double*> malloc(N * sizeof(double))
    try:
        with nogil:
            for i in range(N):
                _affine_row(P, gains, i, tau, &Y[i * S])
                if _proj(&Y[i * S], &w[0], S, budgets[i], 200, T, &lams[i]) < 0:
                    bad = 1
                    break
                for s in range(S):
                    R[i * S + s] = P[i, s] - T[s]
            if not bad:
                for h in range(S):
                    step = rel_step * fmax(1.0, fabs(P[user, h]))
                    diff = 0.0
                    for j in range(N):
                        if j == user:
                            dy = (1.0 - tau) * step
                        else:
                            dy = -tau * gains[h, j, user] / gains[h, j, j] * step
                        old = Y[j * S + h]
                        Y[j * S + h] = old + dy
                        if _warm_lambda(&Y[j * S], &w[0], S, budgets[j],
                                        lams[j], T, &lam) < 0:
                            bad = 1
                        for s in range(S):
                            rp = P[j, s] - fmax(0.0, Y[j * S + s] - lam)
                            if j == user and s == h:
                                rp += step
                            r = R[j * S + s]
                            diff += (rp - r) * (rp + r)
                        Y[j * S + h] = old
                    out[h] = diff / step
    finally:
        free(Y)
        free(R)
        free(T)
        free(lams)
    if bad:
        raise NonConvergence("projection bisection exceeded 200 iterations")
    return np.asarray(out)
