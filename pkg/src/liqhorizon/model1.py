"""Fixed-horizon benchmark: hands-clean deterministic schedule and the
dynamic-programming strategy with a quadratic terminal penalty.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .params import ImpactParams, check_condition_13, check_grid, uniform_grid
from .trajectory import Trajectory


@dataclass(frozen=True)
class Model1Coefficients:
    kappa: float
    xi_m1: float
    zeta: float

    @classmethod
    def from_params(cls, p: ImpactParams) -> "Model1Coefficients":
        kappa = math.sqrt(p.gamma * p.sigma**2 / p.nu)
        xi = 1.0 / (2.0 * p.sigma * math.sqrt(p.gamma * p.nu))
        x = xi * (2.0 * p.phi - p.eta)
        return cls(kappa=kappa, xi_m1=xi, zeta=(1.0 - x) / (1.0 + x))


def coefficients(p: ImpactParams) -> Model1Coefficients:
    return Model1Coefficients.from_params(p)


def _grid(p, grid):
    return uniform_grid(p.T) if grid is None else check_grid(grid, p.T)


def det_inventory(p: ImpactParams, t):
    k = coefficients(p).kappa
    return p.Q * np.sinh(k * (p.T - np.asarray(t, dtype=float))) / math.sinh(k * p.T)


def det_rate(p: ImpactParams, t):
    k = coefficients(p).kappa
    return p.Q * k * np.cosh(k * (p.T - np.asarray(t, dtype=float))) / math.sinh(k * p.T)


def det_solution(p: ImpactParams, grid=None) -> Trajectory:
    """Optimal hands-clean deterministic schedule (sinh profile, free of eta)."""
    t = _grid(p, grid)
    return Trajectory(
        times=t,
        inventory=det_inventory(p, t),
        rate=det_rate(p, t),
        terminal_inventory=0.0,
    )


def _decay(p: ImpactParams, co: Model1Coefficients, t):
    # zeta * exp(-4 gamma xi sigma^2 (T - t)), the recurring term of c(t)
    return co.zeta * np.exp(-4.0 * p.gamma * co.xi_m1 * p.sigma**2 * (p.T - np.asarray(t, dtype=float)))


def dp_coefficient_c(p: ImpactParams, t):
    """Quadratic coefficient of the value function, ``U(t, q) = c(t) q^2``."""
    co = coefficients(p)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > p.T):
        raise ValueError(f"t must lie in [0, {p.T}]")
    e = _decay(p, co, t_arr)
    if np.any(e + 1.0 == 0.0):
        raise NumericalError("c(t) denominator vanishes")
    c = (e - 1.0) / (e + 1.0) / (2.0 * co.xi_m1) - p.eta / 2.0
    c = np.where(t_arr == p.T, -p.phi, c)
    return float(c) if c.ndim == 0 else c


def dp_coefficients(p: ImpactParams, t):
    """``(a, b, c)`` of the quadratic ansatz; the constant and linear parts vanish."""
    c = dp_coefficient_c(p, t)
    zero = 0.0 if np.ndim(c) == 0 else np.zeros_like(c)
    return zero, zero, c


def value_u(p: ImpactParams, t, q):
    return dp_coefficient_c(p, t) * np.asarray(q, dtype=float) ** 2


def dp_terminal_inventory(p: ImpactParams) -> float:
    co = coefficients(p)
    a = 2.0 * p.gamma * co.xi_m1 * p.sigma**2
    return p.Q * (co.zeta + 1.0) / (co.zeta * math.exp(-a * p.T) + math.exp(a * p.T))


def dp_inventory(p: ImpactParams, t):
    co = coefficients(p)
    t = np.asarray(t, dtype=float)
    a = 2.0 * p.gamma * co.xi_m1 * p.sigma**2
    e0 = co.zeta * math.exp(-4.0 * p.gamma * co.xi_m1 * p.sigma**2 * p.T)
    return p.Q * (_decay(p, co, t) + 1.0) / (e0 + 1.0) * np.exp(-a * t)


def dp_trajectory(p: ImpactParams, grid=None) -> Trajectory:
    """Feedback strategy ``theta = -(2c + eta) X / (2 nu)`` along its own path."""
    t = _grid(p, grid)
    c = dp_coefficient_c(p, t)
    x = dp_inventory(p, t)
    return Trajectory(
        times=t,
        inventory=x,
        rate=-(2.0 * c + p.eta) * x / (2.0 * p.nu),
        terminal_inventory=dp_terminal_inventory(p),
        value_coeff=c,
        constrained=check_condition_13(p),
    )


@dataclass(frozen=True)
class ConvergenceRow:
    phi: float
    sup_gap_theta: float
    sup_gap_X: float
    terminal_inventory: float


def convergence_report(p: ImpactParams, phi_ladder, grid=None) -> list[ConvergenceRow]:
    """Sup-norm distance between the penalised and hands-clean strategies per penalty."""
    ladder = [float(v) for v in phi_ladder]
    if any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("phi ladder must be strictly increasing")
    det = det_solution(p, grid)
    rows = []
    for phi in ladder:
        q = p.with_(phi=phi)
        if not check_condition_13(q):
            raise ValueError(f"phi={phi} violates the liquidity condition")
        dp = dp_trajectory(q, det.times)
        rows.append(ConvergenceRow(
            phi=phi,
            sup_gap_theta=float(np.max(np.abs(dp.rate - det.rate))),
            sup_gap_X=float(np.max(np.abs(dp.inventory - det.inventory))),
            terminal_inventory=dp.terminal_inventory,
        ))
    return rows
