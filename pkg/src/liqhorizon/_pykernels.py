"""Pure numpy implementations of the hot kernels.

Every function here has a twin of the same name and signature in
``_ckernels.pyx``. Both perform the same floating-point operations in the
same order so the two backends agree bit for bit.
"""
from __future__ import annotations

import numpy as np


def thomas(lower, diag, upper, rhs, pivot_tol):
    """Forward elimination / back substitution without pivoting.

    Returns ``(x, bad)`` where ``bad`` is the row of the first pivot with
    magnitude below ``pivot_tol``, or -1.
    """
    n = diag.shape[0]
    cp = np.empty(n)
    dp = np.empty(n)
    x = np.empty(n)
    piv = diag[0]
    if abs(piv) < pivot_tol:
        return x, 0
    cp[0] = upper[0] / piv if n > 1 else 0.0
    dp[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i - 1] * cp[i - 1]
        if abs(piv) < pivot_tol:
            return x, i
        if i < n - 1:
            cp[i] = upper[i] / piv
        dp[i] = (rhs[i] - lower[i - 1] * dp[i - 1]) / piv
    x[n - 1] = dp[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = dp[i] - cp[i] * x[i + 1]
    return x, -1


def explicit_sweep(values, r, u, v, src, piv_coef, far_field, barrier_value,
                   picard_iters, pivot_tol):
    """March the value surface forward in time-to-maturity.

    ``values[0]`` must hold the initial row. Interior update for node j::

        (1 - piv_coef * g_j) * h_new_j = v*h_{j-1} + (1-r)*h_j + u*h_{j+1} - src

    with ``g = h`` on the first Picard sweep and ``g = h_new`` afterwards.
    Returns ``(status, row, col)``: status 0 ok, 1 small pivot, 2 non-finite.
    """
    n_rows, n_cols = values.shape
    one_r = 1.0 - r
    for i in range(n_rows - 1):
        h = values[i]
        rhs = v * h[:-2] + one_r * h[1:-1] + u * h[2:] - src
        g = h[1:-1]
        for _ in range(picard_iters):
            piv = 1.0 - piv_coef * g
            small = np.abs(piv) < pivot_tol
            if small.any():
                return 1, i + 1, int(np.argmax(small)) + 1
            g = rhs / piv
        row = values[i + 1]
        row[0] = barrier_value
        row[1:-1] = g
        row[-1] = far_field[i + 1]
        bad = ~np.isfinite(row)
        if bad.any():
            return 2, i + 1, int(np.argmax(bad))
    return 0, -1, -1


def first_passage_block(x, z, drift_dt, vol_sqdt):
    """Advance drifted Brownian positions ``x`` through the increments in ``z``.

    ``x`` (shape P) is updated in place to the last position of paths that
    stay alive. Returns the 1-based step within the block at which each path
    first reaches ``<= 0``, or -1 if it did not.
    """
    n_paths, n_steps = z.shape
    walk = np.empty((n_paths, n_steps + 1))
    walk[:, 0] = x
    np.multiply(z, vol_sqdt, out=walk[:, 1:])
    walk[:, 1:] = drift_dt + walk[:, 1:]
    np.cumsum(walk, axis=1, out=walk)
    crossed = walk[:, 1:] <= 0.0
    any_hit = crossed.any(axis=1)
    hit = np.where(any_hit, np.argmax(crossed, axis=1) + 1, -1)
    x[:] = walk[:, -1]
    return hit.astype(np.int64)


def surface_replay(table, dx, log_ratio, dws, dt, q0, s0, sigma, eta, nu, inv2nu):
    """Closed-loop liquidation driven by a value-surface table.

    ``table[row, k]`` is the PDE unknown at time-to-maturity row ``row`` and
    log-distance node ``k``; path step i uses row ``N - i``. Returns arrays
    ``(X, theta, S, C, term_idx, barrier_hit, clamped)``.
    """
    n_paths, n_cols = log_ratio.shape
    n = n_cols - 1
    m = table.shape[1] - 1
    X = np.empty((n_paths, n + 1))
    theta = np.zeros((n_paths, n + 1))
    S = np.empty((n_paths, n + 1))
    C = np.empty((n_paths, n + 1))
    term_idx = np.full(n_paths, n, dtype=np.int64)
    barrier_hit = np.zeros(n_paths, dtype=np.bool_)
    clamped = np.zeros(n_paths, dtype=np.bool_)
    X[:, 0] = q0
    S[:, 0] = s0
    C[:, 0] = 0.0
    alive = np.ones(n_paths, dtype=np.bool_)
    for i in range(n):
        xs = log_ratio[:, i]
        stop = alive & (xs <= 0.0)
        if stop.any():
            term_idx[stop] = i
            barrier_hit[stop] = True
            alive &= ~stop
        x_cur = X[:, i]
        k = np.clip(np.ceil(xs / dx - 0.5), 0, m).astype(np.int64)
        th = -table[n - i, k] * x_cur * inv2nu
        th = np.where(th < 0.0, 0.0, th)
        over = th * dt > x_cur
        flag = alive & over
        clamped |= flag
        th = np.where(over, x_cur / dt, th)
        th = np.where(alive, th, 0.0)
        theta[:, i] = th
        sell = th * dt
        C[:, i + 1] = C[:, i] + sell * (S[:, i] - nu * th)
        X[:, i + 1] = np.maximum(x_cur - sell, 0.0)
        S[:, i + 1] = np.where(alive, S[:, i] + (-eta * th * dt + sigma * dws[:, i]), S[:, i])
    last = alive.copy()
    if last.any():
        k = np.clip(np.ceil(log_ratio[:, n] / dx - 0.5), 0, m).astype(np.int64)
        th = -table[0, k] * X[:, n] * inv2nu
        theta[:, n] = np.where(last, np.where(th < 0.0, 0.0, th), 0.0)
    return X, theta, S, C, term_idx, barrier_hit, clamped
