"""Liquidation that is suspended by an exogenous event with hazard rate l(t).

The random-horizon problem is handled through its discounted fixed-horizon
equivalent: running reward ``Pi - phi*l*X^2`` discounted by ``l`` and the
terminal penalty ``-phi X_T^2``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .numerics import TridiagonalSystem, cumulative_trapezoid, rk4_backward, solve_tridiagonal
from .params import (
    ConfigError,
    ImpactParams,
    check_condition_13,
    check_grid,
    running_cost,
    uniform_grid,
)
from .trajectory import Trajectory


@dataclass(frozen=True)
class HazardSpec:
    """Termination intensity: constant ``lam`` or piecewise-linear table."""

    kind: str
    lam: float = 0.0
    times: Optional[np.ndarray] = None
    rates: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "constant":
            if not (math.isfinite(self.lam) and self.lam >= 0):
                raise ValueError("constant hazard must be finite and >= 0")
        elif self.kind == "tabulated":
            t = np.asarray(self.times, dtype=float)
            r = np.asarray(self.rates, dtype=float)
            if t.ndim != 1 or t.shape != r.shape or t.size < 2:
                raise ValueError("hazard table needs matching 1-d times and rates, length >= 2")
            if np.any(np.diff(t) <= 0):
                raise ValueError("hazard table times must be strictly increasing")
            if np.any(r < 0) or not np.all(np.isfinite(r)):
                raise ValueError("hazard rates must be finite and >= 0")
            object.__setattr__(self, "times", t)
            object.__setattr__(self, "rates", r)
        else:
            raise ValueError(f"unknown hazard kind {self.kind!r}")

    @classmethod
    def constant(cls, lam: float) -> "HazardSpec":
        return cls(kind="constant", lam=float(lam))

    @classmethod
    def tabulated(cls, times, rates) -> "HazardSpec":
        return cls(kind="tabulated", times=times, rates=rates)

    @classmethod
    def from_csv(cls, path) -> "HazardSpec":
        """Read a ``t,l`` CSV with a header row."""
        path = Path(path)
        times, rates = [], []
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [h.strip() for h in header] != ["t", "l"]:
                raise ConfigError(f"{path}: header must be 't,l'")
            for rowno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != 2:
                    raise ConfigError(f"{path}: row {rowno}: expected 2 columns, got {row!r}")
                try:
                    t, rate = float(row[0]), float(row[1])
                except ValueError:
                    raise ConfigError(f"{path}: row {rowno}: unparsable number in {row!r}") from None
                if times and t <= times[-1]:
                    raise ConfigError(f"{path}: row {rowno}: time {t} is not increasing")
                if rate < 0:
                    raise ConfigError(f"{path}: row {rowno}: negative hazard {rate}")
                times.append(t)
                rates.append(rate)
        if len(times) < 2:
            raise ConfigError(f"{path}: need at least two rows")
        return cls.tabulated(times, rates)

    def covers(self, T: float) -> bool:
        return self.kind == "constant" or (self.times[0] <= 0.0 and self.times[-1] >= T)

    def rate(self, t):
        if self.kind == "constant":
            return np.full_like(np.asarray(t, dtype=float), self.lam) if np.ndim(t) else self.lam
        out = np.interp(t, self.times, self.rates)
        return float(out) if np.ndim(out) == 0 else out

    def cumulative(self, t):
        """``int_0^t l(u) du``; exact for both kinds (trapezoid on the linear table)."""
        t_arr = np.asarray(t, dtype=float)
        if self.kind == "constant":
            out = self.lam * t_arr
        else:
            knots = self.times
            node_int = cumulative_trapezoid(self.rates, knots)
            base = np.interp(0.0, knots, node_int) if knots[0] < 0 else 0.0
            idx = np.clip(np.searchsorted(knots, t_arr, side="right") - 1, 0, knots.size - 2)
            lt = np.interp(t_arr, knots, self.rates)
            out = node_int[idx] + 0.5 * (self.rates[idx] + lt) * (t_arr - knots[idx]) - base
        return float(out) if out.ndim == 0 else out


def _check_hazard(h: HazardSpec, T: float):
    if not h.covers(T):
        raise ValueError(f"hazard table must cover [0, {T}]")


def survival_probability(h: HazardSpec, t):
    """Probability that no event has occurred by time t."""
    return np.exp(-np.asarray(h.cumulative(t)))


def termination_density(h: HazardSpec, t):
    """Density of the stopped horizon min(T, event) on [0, T)."""
    return np.asarray(h.rate(t)) * survival_probability(h, t)


def horizon_point_mass(h: HazardSpec, T: float) -> float:
    """Probability that liquidation runs to the horizon (no event before T)."""
    return float(survival_probability(h, T))


@dataclass(frozen=True)
class Model2Coefficients:
    alpha_m2: float
    xi_hat: float
    zeta_hat: float

    @classmethod
    def from_params(cls, p: ImpactParams, lam: float) -> "Model2Coefficients":
        alpha = math.sqrt(lam**2 / 4.0 + (p.gamma * p.sigma**2 + (p.phi - p.eta / 2.0) * lam) / p.nu)
        xi_hat = 1.0 / (2.0 * alpha * p.nu)
        x = xi_hat * (2.0 * p.phi + lam * p.nu - p.eta)
        return cls(alpha_m2=alpha, xi_hat=xi_hat, zeta_hat=(1.0 - x) / (1.0 + x))


def _grid(p, grid):
    return uniform_grid(p.T) if grid is None else check_grid(grid, p.T)


def det_solution_const_hazard(p: ImpactParams, lam: float, grid=None) -> Trajectory:
    """Closed-form hands-clean schedule of the equivalent problem for constant hazard."""
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    t = _grid(p, grid)
    a = Model2Coefficients.from_params(p, lam).alpha_m2
    # sinh/cosh ratios in decaying-exponential form so large alpha cannot overflow
    scale = p.Q * np.exp((lam / 2.0 - a) * t) / -math.expm1(-2.0 * a * p.T)
    back = np.exp(-2.0 * a * (p.T - t))
    x = scale * (1.0 - back)
    theta = -scale * (lam / 2.0 * (1.0 - back) - a * (1.0 + back))
    return Trajectory(times=t, inventory=x, rate=theta, terminal_inventory=0.0)


def det_bvp_solve(p: ImpactParams, h: HazardSpec, n_nodes: int = 1001) -> Trajectory:
    """Central-difference solve of ``X'' = l X' + k(t) X`` with X(0)=Q, X(T)=0.

    ``k(t) = (gamma sigma^2 + (phi - eta/2) l(t)) / nu``. The rate is ``-X'``
    by central differences inside and second-order one-sided ones at the ends.
    """
    if n_nodes < 3:
        raise ValueError("n_nodes must be >= 3")
    _check_hazard(h, p.T)
    t = np.linspace(0.0, p.T, n_nodes)
    dt = t[1] - t[0]
    l_int = np.asarray(h.rate(t[1:-1]), dtype=float)
    k_int = (p.gamma * p.sigma**2 + (p.phi - p.eta / 2.0) * l_int) / p.nu
    n = n_nodes - 2
    diag = -2.0 / dt**2 - k_int
    lower_full = 1.0 / dt**2 + l_int / (2.0 * dt)
    upper_full = 1.0 / dt**2 - l_int / (2.0 * dt)
    rhs = np.zeros(n)
    rhs[0] -= lower_full[0] * p.Q  # X(0) = Q moved to the right-hand side
    x_int = solve_tridiagonal(TridiagonalSystem(lower_full[1:], diag, upper_full[:-1], rhs))
    x = np.concatenate(([p.Q], x_int, [0.0]))
    theta = np.empty_like(x)
    theta[1:-1] = -(x[2:] - x[:-2]) / (2.0 * dt)
    theta[0] = -(-3.0 * x[0] + 4.0 * x[1] - x[2]) / (2.0 * dt)
    theta[-1] = -(3.0 * x[-1] - 4.0 * x[-2] + x[-3]) / (2.0 * dt)
    return Trajectory(times=t, inventory=x, rate=theta, terminal_inventory=0.0)


def tilde_c_const_hazard(p: ImpactParams, lam: float, t):
    """Closed-form value coefficient ``F(t, q) = c_tilde(t) q^2`` for constant hazard."""
    co = Model2Coefficients.from_params(p, lam)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > p.T):
        raise ValueError(f"t must lie in [0, {p.T}]")
    e = co.zeta_hat * np.exp(-2.0 * co.alpha_m2 * (p.T - t_arr))
    c = (e - 1.0) / (e + 1.0) / (2.0 * co.xi_hat) + (lam * p.nu - p.eta) / 2.0
    c = np.where(t_arr == p.T, -p.phi, c)
    return float(c) if c.ndim == 0 else c


def riccati_rhs(p: ImpactParams, h: HazardSpec):
    """Right-hand side ``dc/dt = l c + gamma sigma^2 + phi l - (2c + eta)^2 / (4 nu)``."""
    gs2 = p.gamma * p.sigma**2

    def f(t, c):
        lt = h.rate(t)
        return lt * c + gs2 + p.phi * lt - (2.0 * c + p.eta) ** 2 / (4.0 * p.nu)

    return f


@dataclass(frozen=True)
class RiccatiTable:
    """Value coefficient ``c_tilde`` on a uniform grid; the a and b coefficients are identically 0."""

    times: np.ndarray
    c_tilde: np.ndarray


def riccati_solve(p: ImpactParams, h: HazardSpec, n_steps: int = 1000) -> RiccatiTable:
    """Backward RK4 for the value coefficient from ``c_tilde(T) = -phi``."""
    _check_hazard(h, p.T)
    limit = 1e6 * max(p.phi, 1e-300)
    times, c = rk4_backward(riccati_rhs(p, h), -p.phi, p.T, n_steps, abort=lambda y: abs(y) > limit)
    return RiccatiTable(times=times, c_tilde=c)


def dp_trajectory_m2(p: ImpactParams, lam: float, grid=None) -> Trajectory:
    """Closed-form penalised strategy for constant hazard (before any event)."""
    t = _grid(p, grid)
    co = Model2Coefficients.from_params(p, lam)
    a = co.alpha_m2
    e0 = co.zeta_hat * math.exp(-2.0 * a * p.T)
    x = p.Q * np.exp(-(a - lam / 2.0) * t) * (co.zeta_hat * np.exp(-2.0 * a * (p.T - t)) + 1.0) / (e0 + 1.0)
    c = tilde_c_const_hazard(p, lam, t)
    x_T = p.Q * math.exp(-(a - lam / 2.0) * p.T) * (co.zeta_hat + 1.0) / (e0 + 1.0)
    return Trajectory(
        times=t,
        inventory=x,
        rate=-(2.0 * c + p.eta) * x / (2.0 * p.nu),
        terminal_inventory=x_T,
        value_coeff=c,
        constrained=check_condition_13(p),
    )


def dp_trajectory_hazard(p: ImpactParams, h: HazardSpec, n_steps: int = 1000) -> Trajectory:
    """Penalised strategy for a general hazard from the RK4 value coefficient.

    The inventory integrates the relative rate with the trapezoid rule.
    """
    tab = riccati_solve(p, h, n_steps)
    rel = -(2.0 * tab.c_tilde + p.eta) / (2.0 * p.nu)
    x = p.Q * np.exp(-cumulative_trapezoid(rel, tab.times))
    return Trajectory(
        times=tab.times,
        inventory=x,
        rate=rel * x,
        terminal_inventory=float(x[-1]),
        value_coeff=tab.c_tilde,
        constrained=check_condition_13(p),
    )


def discounted_objective(p: ImpactParams, h: HazardSpec, traj: Trajectory) -> float:
    """Equivalent fixed-horizon reward of a strategy, by trapezoid quadrature.

    ``int_0^T P(t) [Pi(theta, X) - phi l X^2] dt - phi P(T) X_T^2`` with P the
    survival probability.
    """
    t = traj.times
    surv = survival_probability(h, t)
    integrand = surv * (running_cost(traj.rate, traj.inventory, p) - p.phi * h.rate(t) * traj.inventory**2)
    integrand = np.asarray(integrand, dtype=float)
    return float(np.trapezoid(integrand, t)) - p.phi * float(surv[-1]) * traj.terminal_inventory**2


def reduction_residual(p: ImpactParams, h: HazardSpec, tab: RiccatiTable) -> np.ndarray:
    """Residual of ``u'' - l u' - k u = 0`` for ``u = exp(int (c_tilde + eta/2) / nu)``.

    Derivatives by central differences on the table nodes (interior only).
    """
    t = tab.times
    dt = t[1] - t[0]
    u = np.exp(cumulative_trapezoid((tab.c_tilde + p.eta / 2.0) / p.nu, t))
    lt = np.asarray(h.rate(t[1:-1]), dtype=float)
    k = (p.gamma * p.sigma**2 + (p.phi - p.eta / 2.0) * lt) / p.nu
    upp = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / dt**2
    up = (u[2:] - u[:-2]) / (2.0 * dt)
    return (upp - lt * up - k * u[1:-1]) / u[1:-1]

