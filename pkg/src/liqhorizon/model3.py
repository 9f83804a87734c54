"""Counterparty-default model: liquidation stops when the firm value first
falls to a barrier.

The value function is ``H(t, y, q) = h(t, y) q^2``. Writing
``x = log(y / alpha*)``, ``tau = T - t`` and ``h_tilde = 2h + eta``, the
coefficient solves

    d_tau h~ = (beta - xi^2/2) d_x h~ + (xi^2/2) d_xx h~ - 2 gamma sigma^2 + h~^2 / (2 nu)

with ``h~ = -2 phi + eta`` at ``tau = 0`` and on the barrier ``x = 0``, and the
fixed-horizon coefficient ``2 c(T - tau) + eta`` at ``x = x_max``. It is solved
with an explicit scheme whose quadratic term is linearised by Picard
iteration around the previous row.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _backend, model1, sim_engine
from .errors import DefaultOccurred, NumericalError, StabilityError
from .params import ImpactParams

#: default cap on the automatically chosen number of space steps
MAX_AUTO_SPACE_STEPS = 10000
PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class FirmValueParams:
    """Geometric Brownian firm value ``dY = Y (beta dt + xi dW^Y)`` and default barrier."""

    beta: float = -0.5
    xi_firm: float = 2.0
    rho: float = 0.0
    y0: float = 1000.0
    alpha_star: float = 10.0

    def __post_init__(self):
        for name in ("beta", "xi_firm", "rho", "y0", "alpha_star"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number, got {value!r}")
        if self.xi_firm <= 0:
            raise ValueError("xi_firm must be > 0")
        if self.alpha_star <= 0:
            raise ValueError("alpha_star must be > 0")
        if self.y0 <= self.alpha_star:
            raise ValueError("y0 must exceed alpha_star")
        if abs(self.rho) >= 1:
            raise ValueError("|rho| must be < 1")

    @property
    def log_drift(self) -> float:
        """Drift of ``log Y``: ``beta - xi^2/2``."""
        return self.beta - self.xi_firm**2 / 2.0

    @property
    def hitting_drift(self) -> float:
        """``alpha = (xi^2/2 - beta) / xi``; default is first passage of ``W + alpha t`` to ``m``."""
        return -self.log_drift / self.xi_firm

    @property
    def x0(self) -> float:
        return math.log(self.y0 / self.alpha_star)

    @property
    def m0(self) -> float:
        return m_of_y(self, self.y0)


def m_of_y(fv: FirmValueParams, y):
    """Distance to default in Brownian units, ``log(y / alpha*) / xi``."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr < fv.alpha_star):
        raise DefaultOccurred(f"firm value below the barrier {fv.alpha_star}")
    m = np.log(y_arr / fv.alpha_star) / fv.xi_firm
    return float(m) if m.ndim == 0 else m


def laplace_hitting(alpha_drift: float, m: float, u: float) -> float:
    """``E[exp(-u kappa_m)] = exp(alpha m - m sqrt(2u + alpha^2))``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    if u <= 0:
        raise ValueError("u must be > 0")
    return math.exp(alpha_drift * m - m * math.sqrt(2.0 * u + alpha_drift**2))


@dataclass(frozen=True)
class SolverGrid:
    n_time: int
    n_space: int
    x_max: float
    dt: float
    dx: float
    r: float
    u: float
    v: float

    @property
    def stability_ok(self) -> bool:
        return self.r <= 1.0 and self.u >= 0.0 and self.v >= 0.0

    @property
    def tau(self) -> np.ndarray:
        return np.linspace(0.0, self.n_time * self.dt, self.n_time + 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.n_space + 1)


def _coeffs(fv: FirmValueParams, dt: float, dx: float):
    r = dt * fv.xi_firm**2 / dx**2
    adv = dt * fv.log_drift / (2.0 * dx)
    return r, r / 2.0 + adv, r / 2.0 - adv


def make_grid(p: ImpactParams, fv: FirmValueParams, n_time: int = 1000,
              n_space: Optional[int] = None, x_max: float = 10.0) -> SolverGrid:
    """Build a grid; ``n_space=None`` picks the largest stable number of space steps.

    The automatic choice is capped at ``MAX_AUTO_SPACE_STEPS``. Raises
    StabilityError when no stable choice exists for this ``n_time``.
    """
    if n_time < 1:
        raise ValueError("n_time must be >= 1")
    if not x_max > 0:
        raise ValueError("x_max must be > 0")
    dt = p.T / n_time
    if n_space is None:
        m = int(min(math.floor(x_max / (fv.xi_firm * math.sqrt(dt))), MAX_AUTO_SPACE_STEPS))
        while m >= 2 and _coeffs(fv, dt, x_max / m)[0] > 1.0:
            m -= 1
        if m < 2 or not SolverGrid(n_time, m, x_max, dt, x_max / m, *_coeffs(fv, dt, x_max / m)).stability_ok:
            raise StabilityError(f"no stable space grid for n_time={n_time}, x_max={x_max}")
        n_space = m
    if n_space < 2:
        raise ValueError("n_space must be >= 2")
    dx = x_max / n_space
    return SolverGrid(n_time, int(n_space), float(x_max), dt, dx, *_coeffs(fv, dt, dx))


@dataclass(frozen=True)
class ValueSurface:
    """``values[i, j]`` is ``h_tilde`` at ``tau_i = i dt`` and ``x_j = j dx``; read-only."""

    grid: SolverGrid
    values: np.ndarray
    params: ImpactParams
    firm: FirmValueParams

    @property
    def tau(self) -> np.ndarray:
        return self.grid.tau

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def h(self) -> np.ndarray:
        """Value coefficient ``h = (h_tilde - eta) / 2``."""
        return (self.values - self.params.eta) / 2.0

    def time_index(self, t) -> np.ndarray:
        """Row of the node nearest to calendar time ``t`` (ties toward the horizon)."""
        tau = self.params.T - np.asarray(t, dtype=float)
        return np.clip(np.ceil(tau / self.grid.dt - 0.5), 0, self.grid.n_time).astype(np.int64)

    def space_index(self, x) -> np.ndarray:
        """Nearest space node to ``x``; ties toward the barrier."""
        k = np.ceil(np.asarray(x, dtype=float) / self.grid.dx - 0.5)
        return np.clip(k, 0, self.grid.n_space).astype(np.int64)


def far_field(p: ImpactParams, grid: SolverGrid) -> np.ndarray:
    """``2 c(T - tau) + eta`` on the time rows."""
    t = np.clip(p.T - grid.tau, 0.0, p.T)
    return 2.0 * np.asarray(model1.dp_coefficient_c(p, t)) + p.eta


def solve_value_surface(p: ImpactParams, fv: FirmValueParams, grid: SolverGrid | None = None,
                        force: bool = False, picard_iters: int = 1,
                        backend: str | None = None) -> ValueSurface:
    """March the explicit Picard scheme from ``tau = 0`` to ``tau = T``.

    Raises StabilityError for an unstable grid unless ``force`` is set, and
    NumericalError on a pivot below ``1e-12`` or a non-finite value.
    """
    grid = make_grid(p, fv) if grid is None else grid
    if not math.isclose(grid.n_time * grid.dt, p.T, rel_tol=1e-12):
        raise ValueError("grid time span does not match the horizon")
    if picard_iters < 1:
        raise ValueError("picard_iters must be >= 1")
    if not grid.stability_ok and not force:
        raise StabilityError(
            f"explicit scheme unstable: r={grid.r:.6g}, u={grid.u:.6g}, v={grid.v:.6g}")
    barrier = -2.0 * p.phi + p.eta
    ff = np.ascontiguousarray(far_field(p, grid))
    values = np.empty((grid.n_time + 1, grid.n_space + 1))
    values[0, :] = barrier
    values[0, -1] = ff[0]
    kern = _backend.get_kernels(backend)
    status, row, col = kern.explicit_sweep(
        values, grid.r, grid.u, grid.v,
        2.0 * grid.dt * p.gamma * p.sigma**2,
        grid.dt / (2.0 * p.nu),
        ff, barrier, int(picard_iters), PIVOT_TOL,
    )
    if status == 1:
        raise NumericalError(f"Picard pivot below {PIVOT_TOL} at step {row}, node {col}")
    if status == 2:
        raise NumericalError(f"non-finite value at step {row}, node {col}")
    values.setflags(write=False)
    return ValueSurface(grid=grid, values=values, params=p, firm=fv)


def strategy_at(vs: ValueSurface, t, y, q):
    """Feedback rate ``-h_tilde(tau, x_k) q / (2 nu)`` floored at 0.

    ``t`` and ``log(y / alpha*)`` are snapped to the nearest grid nodes.
    Raises DefaultOccurred for ``y`` below the barrier.
    """
    p = vs.params
    t_arr = np.asarray(t, dtype=float)
    y_arr = np.asarray(y, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any(y_arr < vs.firm.alpha_star):
        raise DefaultOccurred("firm value below the barrier")
    if np.any(t_arr < 0) or np.any(t_arr > p.T):
        raise ValueError(f"t must lie in [0, {p.T}]")
    if np.any(q_arr < 0):
        raise ValueError("q must be >= 0")
    h = vs.values[vs.time_index(t_arr), vs.space_index(np.log(y_arr / vs.firm.alpha_star))]
    th = -h * q_arr * (1.0 / (2.0 * p.nu))
    th = np.where(th < 0.0, 0.0, th)
    return float(th) if th.ndim == 0 else th


def _check_provenance(vs: ValueSurface, fv: FirmValueParams, p: ImpactParams):
    if vs.params != p:
        raise ValueError("surface was solved for different impact parameters")
    if (vs.firm.beta, vs.firm.xi_firm) != (fv.beta, fv.xi_firm):
        raise ValueError("surface was solved for a different firm-value drift or volatility")


def simulate_batch_m3(vs: ValueSurface, fv: FirmValueParams, p: ImpactParams, seed: int,
                      n_paths: int = 1, backend: str | None = None) -> sim_engine.ReplayResult:
    """Closed-loop liquidation on ``n_paths`` seeded paths, stopping at the barrier or ``T``."""
    _check_provenance(vs, fv, p)
    paths = sim_engine.generate_paths(p, fv, seed=seed, n_steps=vs.grid.n_time, n_paths=n_paths)
    kern = _backend.get_kernels(backend)
    X, theta, S, C, term_idx, barrier_hit, clamped = kern.surface_replay(
        np.ascontiguousarray(vs.values), vs.grid.dx, paths.log_ratio, paths.dW_S, paths.dt,
        p.Q, p.s0, p.sigma, p.eta, p.nu, 1.0 / (2.0 * p.nu),
    )
    barrier_hit = np.asarray(barrier_hit, dtype=bool)
    kind = np.where(barrier_hit, "barrier", "horizon").astype(object)
    return sim_engine.finalize(
        p, paths.times, np.asarray(X), np.asarray(theta), np.asarray(S), np.asarray(C),
        np.asarray(term_idx, dtype=np.int64), kind, np.asarray(clamped, dtype=bool),
        paths.dW_S, log_ratio=paths.log_ratio,
    )


def simulate_liquidation_m3(vs: ValueSurface, fv: FirmValueParams, p: ImpactParams, seed: int,
                            backend: str | None = None):
    """One seeded path: returns ``(Trajectory, PnLRecord)``; the trajectory carries the termination."""
    res = simulate_batch_m3(vs, fv, p, seed, n_paths=1, backend=backend)
    return res.trajectory(0), res.pnl(0)
