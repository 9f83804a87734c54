# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``; same signatures, same arithmetic order."""
import numpy as np

from libc.math cimport ceil, fabs, isfinite


def thomas(const double[::1] lower, const double[::1] diag, const double[::1] upper,
           const double[::1] rhs, double pivot_tol):
    cdef Py_ssize_t n = diag.shape[0]
    cdef Py_ssize_t i
    cdef double piv
    cp_arr = np.empty(n)
    dp_arr = np.empty(n)
    x_arr = np.empty(n)
    cdef double[::1] cp = cp_arr
    cdef double[::1] dp = dp_arr
    cdef double[::1] x = x_arr
    piv = diag[0]
    if fabs(piv) < pivot_tol:
        return x_arr, 0
    cp[0] = upper[0] / piv if n > 1 else 0.0
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if fabs(piv) < pivot_tol:
            return x_arr, i
        if i < n - 1:
            cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x_arr, -1


def explicit_sweep(double[:, ::1] values, double r, double u, double v, double src,
                   double piv_coef, const double[::1] far_field, double barrier_value,
                   int picard_iters, double pivot_tol):
    cdef Py_ssize_t n_rows = values.shape[0]
    cdef Py_ssize_t m = values.shape[1] - 1
    cdef Py_ssize_t i, j
    cdef int k
    cdef double one_r = 1.0 - r
    cdef double rhs, g, piv
    for i in range(n_rows - 1):
        for j in range(1, m):
            rhs = v * values[i, j - 1] + one_r * values[i, j] + u * values[i, j + 1] - src
            g = values[i, j]
            for k in range(picard_iters):
                piv = 1.0 - piv_coef * g
                if fabs(piv) < pivot_tol:
                    return 1, i + 1, j
                g = rhs / piv
            values[i + 1, j] = g
        values[i + 1, 0] = barrier_value
        values[i + 1, m] = far_field[i + 1]
        for j in range(m + 1):
            if not isfinite(values[i + 1, j]):
                return 2, i + 1, j
    return 0, -1, -1


def first_passage_block(double[::1] x, const double[:, ::1] z, double drift_dt, double vol_sqdt):
    cdef Py_ssize_t n_paths = z.shape[0]
    cdef Py_ssize_t n_steps = z.shape[1]
    cdef Py_ssize_t p, k
    cdef double pos
    hit_arr = np.full(n_paths, -1, dtype=np.int64)
    cdef long long[::1] hit = hit_arr
    for p in range(n_paths):
        pos = x[p]
        for k in range(n_steps):
            pos = pos + (drift_dt + z[p, k] * vol_sqdt)
            if pos <= 0.0:
                hit[p] = k + 1
                break
        x[p] = pos
    return hit_arr


def surface_replay(const double[:, ::1] table, double dx, const double[:, ::1] log_ratio,
                   const double[:, ::1] dws, double dt, double q0, double s0, double sigma,
                   double eta, double nu, double inv2nu):
    cdef Py_ssize_t n_paths = log_ratio.shape[0]
    cdef Py_ssize_t n = log_ratio.shape[1] - 1
    cdef Py_ssize_t m = table.shape[1] - 1
    cdef Py_ssize_t p, i, k
    cdef double xs, x_cur, th, sell, kk
    X_arr = np.empty((n_paths, n + 1))
    th_arr = np.zeros((n_paths, n + 1))
    S_arr = np.empty((n_paths, n + 1))
    C_arr = np.empty((n_paths, n + 1))
    term_arr = np.full(n_paths, n, dtype=np.int64)
    barrier_arr = np.zeros(n_paths, dtype=np.bool_)
    clamp_arr = np.zeros(n_paths, dtype=np.bool_)
    cdef double[:, ::1] X = X_arr
    cdef double[:, ::1] theta = th_arr
    cdef double[:, ::1] S = S_arr
    cdef double[:, ::1] C = C_arr
    cdef long long[::1] term_idx = term_arr
    cdef unsigned char[::1] barrier_hit = barrier_arr.view(np.uint8)
    cdef unsigned char[::1] clamped = clamp_arr.view(np.uint8)
    cdef bint alive
    for p in range(n_paths):
        X[p, 0] = q0
        S[p, 0] = s0
        C[p, 0] = 0.0
        alive = True
        for i in range(n):
            if alive:
                xs = log_ratio[p, i]
                if xs <= 0.0:
                    term_idx[p] = i
                    barrier_hit[p] = 1
                    alive = False
            x_cur = X[p, i]
            if alive:
                kk = ceil(xs / dx - 0.5)
                if kk < 0:
                    k = 0
                elif kk > m:
                    k = m
                else:
                    k = <Py_ssize_t>kk
                th = -table[n - i, k] * x_cur * inv2nu
                if th < 0.0:
                    th = 0.0
                if th * dt > x_cur:
                    clamped[p] = 1
                    th = x_cur / dt
            else:
                th = 0.0
            theta[p, i] = th
            sell = th * dt
            C[p, i + 1] = C[p, i] + sell * (S[p, i] - nu * th)
            X[p, i + 1] = x_cur - sell
            if X[p, i + 1] < 0.0:
                X[p, i + 1] = 0.0
            if alive:
                S[p, i + 1] = S[p, i] + (-eta * th * dt + sigma * dws[p, i])
            else:
                S[p, i + 1] = S[p, i]
        if alive:
            kk = ceil(log_ratio[p, n] / dx - 0.5)
            if kk < 0:
                k = 0
            elif kk > m:
                k = m
            else:
                k = <Py_ssize_t>kk
            th = -table[0, k] * X[p, n] * inv2nu
            theta[p, n] = th if th > 0.0 else 0.0
    return X_arr, th_arr, S_arr, C_arr, term_arr, barrier_arr, clamp_arr
