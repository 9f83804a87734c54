"""Seeded path generation, strategy replay and P&L accounting.

Randomness comes from numpy's PCG64 bit generator seeded explicitly; normals
and exponentials use numpy's ziggurat transforms, so a seed pins every path
on every platform numpy supports.

Discretisation of one step ``[t_i, t_{i+1})``: sell ``theta_i dt`` at
``S_i - nu theta_i``, then move the mid price by ``-eta theta_i dt + sigma dW_i``.
The three P&L terms are accumulated with the post-trade inventory so that
``V = C + X S`` matches ``V_0 + R`` up to rounding at every step.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from . import _backend
from .params import ImpactParams
from .trajectory import Termination, Trajectory

TERMINATION_KINDS = ("horizon", "barrier", "event")


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def correlate(dw_s, dz, rho: float):
    """``rho dW_S + sqrt(1 - rho^2) dZ``; accepts ``|rho| <= 1``."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [-1, 1]")
    if rho == 1.0:
        return np.array(dw_s, dtype=float, copy=True)
    return rho * dw_s + math.sqrt(1.0 - rho * rho) * dz


@dataclass(frozen=True)
class PathSample:
    """Brownian increments and the resulting unimpacted price / firm-value paths.

    Arrays are ``(n_paths, n_steps)`` for increments and ``(n_paths, n_steps+1)``
    for paths. ``S_path`` excludes permanent impact, which depends on the
    strategy and is added during replay. ``event_clock`` holds unit
    exponential draws used to place exogenous events.
    """

    seed: int
    times: np.ndarray
    dW_S: np.ndarray
    dW_Y: np.ndarray
    S_path: np.ndarray
    log_ratio: np.ndarray
    alpha_star: float
    event_clock: np.ndarray

    @property
    def n_paths(self) -> int:
        return self.dW_S.shape[0]

    @property
    def n_steps(self) -> int:
        return self.dW_S.shape[1]

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def Y_path(self) -> np.ndarray:
        return self.alpha_star * np.exp(self.log_ratio)


def generate_paths(p: ImpactParams, fv=None, seed: int = 0, n_steps: int = 1000,
                   n_paths: int = 1) -> PathSample:
    from .model3 import FirmValueParams

    if n_steps < 1 or n_paths < 1:
        raise ValueError("n_steps and n_paths must be >= 1")
    fv = FirmValueParams() if fv is None else fv
    rng = make_rng(seed)
    dt = p.T / n_steps
    sq = math.sqrt(dt)
    dw_s = sq * rng.standard_normal((n_paths, n_steps))
    dz = sq * rng.standard_normal((n_paths, n_steps))
    clock = rng.standard_exponential(n_paths)
    dw_y = correlate(dw_s, dz, fv.rho)
    s_path = np.empty((n_paths, n_steps + 1))
    s_path[:, 0] = p.s0
    s_path[:, 1:] = p.s0 + np.cumsum(p.sigma * dw_s, axis=1)
    log_ratio = np.empty((n_paths, n_steps + 1))
    log_ratio[:, 0] = fv.x0
    log_ratio[:, 1:] = fv.x0 + np.cumsum(fv.log_drift * dt + fv.xi_firm * dw_y, axis=1)
    return PathSample(
        seed=int(seed),
        times=np.linspace(0.0, p.T, n_steps + 1),
        dW_S=dw_s,
        dW_Y=dw_y,
        S_path=s_path,
        log_ratio=log_ratio,
        alpha_star=fv.alpha_star,
        event_clock=clock,
    )


@dataclass(frozen=True)
class PnLRecord:
    cash: np.ndarray
    book_value: np.ndarray
    realized_gain: float
    quadratic_variation: float
    terminal_penalty: float
    objective: float
    termination: Termination


@dataclass
class ReplayResult:
    """Per-path arrays of a replayed batch; row p is path p."""

    p: ImpactParams
    times: np.ndarray
    inventory: np.ndarray
    rate: np.ndarray
    price: np.ndarray
    cash: np.ndarray
    term_idx: np.ndarray
    term_kind: np.ndarray
    clamped: np.ndarray
    temporary_cost: np.ndarray
    permanent_cost: np.ndarray
    noise: np.ndarray
    penalty: np.ndarray
    quadratic_variation: np.ndarray
    log_ratio: Optional[np.ndarray] = None

    @property
    def n_paths(self) -> int:
        return self.inventory.shape[0]

    @property
    def book_value(self) -> np.ndarray:
        return self.cash + self.inventory * self.price

    @property
    def realized_gain(self) -> np.ndarray:
        return self.temporary_cost + self.permanent_cost + self.noise - self.penalty

    @property
    def objective(self) -> np.ndarray:
        return self.realized_gain - self.p.gamma * self.quadratic_variation

    @property
    def terminal_inventory(self) -> np.ndarray:
        return self.inventory[np.arange(self.n_paths), self.term_idx]

    @property
    def termination_time(self) -> np.ndarray:
        return self.times[self.term_idx]

    def accounting_residual(self) -> np.ndarray:
        """Max over steps of ``|V - V_0 - R_t|`` relative to ``max(1, |V|)``, per path."""
        dt = self.times[1] - self.times[0]
        th = self.rate[:, :-1]
        x_next = self.inventory[:, 1:]
        dS = np.diff(self.price, axis=1)
        incr = -self.p.nu * th * th * dt + x_next * dS
        r = np.zeros_like(self.cash)
        r[:, 1:] = np.cumsum(incr, axis=1)
        v = self.book_value
        v0 = self.p.Q * self.p.s0
        return np.max(np.abs(v - v0 - r) / np.maximum(1.0, np.abs(v)), axis=1)

    def trajectory(self, i: int = 0) -> Trajectory:
        k = int(self.term_idx[i])
        return Trajectory(
            times=self.times[: k + 1],
            inventory=self.inventory[i, : k + 1],
            rate=self.rate[i, : k + 1],
            terminal_inventory=float(self.inventory[i, k]),
            termination=Termination(str(self.term_kind[i]), float(self.times[k]), float(self.inventory[i, k])),
        )

    def pnl(self, i: int = 0) -> PnLRecord:
        k = int(self.term_idx[i])
        b = self.book_value[i, : k + 1].copy()
        return PnLRecord(
            cash=self.cash[i, : k + 1],
            book_value=b,
            realized_gain=float(self.realized_gain[i]),
            quadratic_variation=float(self.quadratic_variation[i]),
            terminal_penalty=float(self.penalty[i]),
            objective=float(self.objective[i]),
            termination=Termination(str(self.term_kind[i]), float(self.times[k]), float(self.inventory[i, k])),
        )

    def summary(self) -> dict:
        obj = self.objective
        n = obj.size
        stderr = float(np.std(obj, ddof=1) / math.sqrt(n)) if n > 1 else None
        return {
            "mean_objective": float(np.mean(obj)),
            "stderr": stderr,
            "mean_terminal_inventory": float(np.mean(self.terminal_inventory)),
            "clamp_rate": float(np.mean(self.clamped)),
        }


def finalize(p: ImpactParams, times, X, theta, S, C, term_idx, term_kind, clamped, dw_s,
             log_ratio=None) -> ReplayResult:
    """Accumulate the P&L decomposition and quadratic variation up to termination."""
    n = times.size - 1
    dt = float(times[1] - times[0])
    active = np.arange(n)[None, :] < term_idx[:, None]
    th = np.where(active, theta[:, :-1], 0.0)
    x_next = X[:, 1:]
    x_now = X[:, :-1]
    temp = np.sum(-p.nu * th * th * dt, axis=1)
    perm = np.sum(-p.eta * x_next * th * dt, axis=1)
    noise = np.sum(np.where(active, p.sigma * x_next * dw_s, 0.0), axis=1)
    qv = np.sum(np.where(active, p.sigma**2 * x_now * x_now * dt, 0.0), axis=1)
    x_term = X[np.arange(X.shape[0]), term_idx]
    return ReplayResult(
        p=p, times=times, inventory=X, rate=theta, price=S, cash=C,
        term_idx=term_idx, term_kind=term_kind, clamped=clamped,
        temporary_cost=temp, permanent_cost=perm, noise=noise,
        penalty=p.phi * x_term**2, quadratic_variation=qv, log_ratio=log_ratio,
    )


RateRule = Union[np.ndarray, Callable[[float, np.ndarray, np.ndarray, int], np.ndarray]]


def event_indices(paths: PathSample, hazard) -> np.ndarray:
    """First grid index at which the cumulative hazard reaches each path's exponential clock."""
    cum = np.asarray(hazard.cumulative(paths.times), dtype=float)
    idx = np.searchsorted(cum, paths.event_clock, side="left")
    return np.where(idx > paths.n_steps, paths.n_steps + 1, idx)


def replay_strategy(paths: PathSample, strategy: RateRule, p: ImpactParams, *,
                    barrier: bool = False, hazard=None) -> ReplayResult:
    """Run a rate rule over every path in ``paths``.

    ``strategy`` is either an array of rates on the ``n_steps+1`` grid nodes or
    a callable ``(t, X, log_ratio, i) -> theta`` vectorised over paths. Trading
    stops at the first grid time with ``log_ratio <= 0`` when ``barrier`` is
    set, or at the first grid time at or after the exogenous event when a
    hazard is given. Negative rates raise ValueError.
    """
    n = paths.n_steps
    P = paths.n_paths
    dt = paths.dt
    times = paths.times
    if isinstance(strategy, np.ndarray) or not callable(strategy):
        table = np.asarray(strategy, dtype=float)
        if table.shape != (n + 1,):
            raise ValueError(f"rate array must have shape ({n + 1},)")

        def rule(t, x, lr, i):
            return np.full(x.shape, table[i])
    else:
        rule = strategy

    X = np.empty((P, n + 1))
    theta = np.zeros((P, n + 1))
    S = np.empty((P, n + 1))
    C = np.empty((P, n + 1))
    X[:, 0] = p.Q
    S[:, 0] = p.s0
    C[:, 0] = 0.0
    term_idx = np.full(P, n, dtype=np.int64)
    kind = np.full(P, "horizon", dtype=object)
    clamped = np.zeros(P, dtype=bool)
    alive = np.ones(P, dtype=bool)
    ev = event_indices(paths, hazard) if hazard is not None else None
    dws = paths.dW_S
    for i in range(n):
        if barrier:
            stop = alive & (paths.log_ratio[:, i] <= 0.0)
            term_idx[stop] = i
            kind[stop] = "barrier"
            alive &= ~stop
        if ev is not None:
            stop = alive & (ev <= i)
            term_idx[stop] = i
            kind[stop] = "event"
            alive &= ~stop
        x_cur = X[:, i]
        th = np.broadcast_to(np.asarray(rule(times[i], x_cur, paths.log_ratio[:, i], i), dtype=float), (P,))
        if np.any(th[alive] < 0.0):
            raise ValueError(f"strategy returned a negative rate at t={times[i]:.6g}")
        over = th * dt > x_cur
        clamped |= alive & over
        th = np.where(over, x_cur / dt, th)
        th = np.where(alive, th, 0.0)
        theta[:, i] = th
        sell = th * dt
        C[:, i + 1] = C[:, i] + sell * (S[:, i] - p.nu * th)
        X[:, i + 1] = np.maximum(x_cur - sell, 0.0)
        S[:, i + 1] = np.where(alive, S[:, i] + (-p.eta * th * dt + p.sigma * dws[:, i]), S[:, i])
    if alive.any():
        th = np.broadcast_to(np.asarray(rule(times[n], X[:, n], paths.log_ratio[:, n], n), dtype=float), (P,))
        theta[:, n] = np.where(alive, np.maximum(th, 0.0), 0.0)
    return finalize(p, times, X, theta, S, C, term_idx, kind, clamped, dws,
                    log_ratio=paths.log_ratio if barrier else None)


@dataclass(frozen=True)
class HittingEstimate:
    mean: float
    stderr: float
    n_paths: int
    dt: float
    cap: float


def hitting_transform_mc(alpha: float, m: float, u: float, n_paths: int, n_steps: int,
                         seed: int, backend: str | None = None, batch: int = 4096,
                         block: int = 1024) -> HittingEstimate:
    """Monte Carlo estimate of ``E[exp(-u kappa)]`` for the first time
    ``W_t + alpha t`` reaches ``m``.

    The crossing is monitored on a grid of step ``dt = (50/u) / n_steps``;
    paths that have not crossed by ``50/u`` contribute 0. Discrete monitoring
    can only delay the crossing, so the estimate is biased low.
    """
    if u <= 0:
        raise ValueError("u must be > 0")
    if m < 0:
        raise ValueError("m must be >= 0")
    if n_paths < 1 or n_steps < 1:
        raise ValueError("n_paths and n_steps must be >= 1")
    cap = 50.0 / u
    dt = cap / n_steps
    hit = np.full(n_paths, -1, dtype=np.int64)
    if m == 0.0:
        hit[:] = 0
    else:
        kern = _backend.get_kernels(backend)
        rng = make_rng(seed)
        drift_dt = -alpha * dt
        vol = math.sqrt(dt)
        for start in range(0, n_paths, batch):
            ids = np.arange(start, min(start + batch, n_paths))
            x = np.full(ids.size, float(m))
            done = 0
            while ids.size and done < n_steps:
                k = min(block, n_steps - done)
                z = rng.standard_normal((ids.size, k))
                h = np.asarray(kern.first_passage_block(x, z, drift_dt, vol))
                crossed = h >= 0
                hit[ids[crossed]] = done + h[crossed]
                ids = ids[~crossed]
                x = np.ascontiguousarray(x[~crossed])
                done += k
    contrib = np.where(hit >= 0, np.exp(-u * hit * dt), 0.0)
    stderr = float(np.std(contrib, ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else float("nan")
    return HittingEstimate(mean=float(np.mean(contrib)), stderr=stderr, n_paths=n_paths, dt=dt, cap=cap)


def estimate_hitting_transform(fv, u: float, n_paths: int, n_steps: int, seed: int,
                               backend: str | None = None) -> HittingEstimate:
    """Monte Carlo Laplace transform of the default time of firm value ``fv``.

    ``log(Y/alpha*)`` reaches 0 exactly when a Brownian motion with drift
    ``(xi^2/2 - beta)/xi`` reaches ``log(y0/alpha*)/xi``.
    """
    return hitting_transform_mc(fv.hitting_drift, fv.m0, u, n_paths, n_steps, seed, backend=backend)
