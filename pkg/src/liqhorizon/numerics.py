"""Shared numerical kernels: tridiagonal solve, backward RK4, quadrature, interpolation."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import _backend
from .errors import NumericalError, SingularSystemError


@dataclass
class TridiagonalSystem:
    """``lower[i-1]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] = rhs[i]``."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        self.lower = np.ascontiguousarray(self.lower, dtype=float)
        self.diag = np.ascontiguousarray(self.diag, dtype=float)
        self.upper = np.ascontiguousarray(self.upper, dtype=float)
        self.rhs = np.ascontiguousarray(self.rhs, dtype=float)
        n = self.diag.size
        if n < 1:
            raise ValueError("system size must be >= 1")
        if self.lower.size != n - 1 or self.upper.size != n - 1:
            raise ValueError("lower and upper must have length n-1")
        if self.rhs.size != n:
            raise ValueError("rhs must have length n")

    @property
    def size(self) -> int:
        return self.diag.size

    def dense(self) -> np.ndarray:
        a = np.diag(self.diag)
        if self.size > 1:
            a += np.diag(self.lower, -1) + np.diag(self.upper, 1)
        return a

    def matvec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = self.diag * x
        y[1:] += self.lower * x[:-1]
        y[:-1] += self.upper * x[1:]
        return y


def solve_tridiagonal(sys: TridiagonalSystem, backend: str | None = None) -> np.ndarray:
    """Thomas elimination without pivoting.

    Raises SingularSystemError when a pivot falls below ``1e-14 * max|diag|``.
    """
    scale = float(np.max(np.abs(sys.diag)))
    if scale == 0.0:
        raise SingularSystemError("tridiagonal system has an all-zero diagonal")
    k = _backend.get_kernels(backend)
    # n == 1 has empty off-diagonals; pad so the kernels can index upper[0]
    upper = sys.upper if sys.size > 1 else np.zeros(1)
    x, bad = k.thomas(sys.lower, sys.diag, upper, sys.rhs, 1e-14 * scale)
    if bad >= 0:
        raise SingularSystemError(f"near-zero pivot at row {bad}")
    return np.asarray(x)


def rk4_backward(f: Callable[[float, float], float], terminal_value: float, T: float,
                 n_steps: int, abort: Callable[[float], bool] | None = None):
    """Integrate ``y' = f(t, y)`` from ``y(T) = terminal_value`` down to ``t = 0``.

    Classical fourth-order steps of size ``T / n_steps``. Returns ``(times, values)``
    in increasing time order. ``abort(y)`` returning True stops the integration
    with NumericalError.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    h = T / n_steps
    times = np.linspace(0.0, T, n_steps + 1)
    y = np.empty(n_steps + 1)
    y[-1] = yk = float(terminal_value)
    for i in range(n_steps, 0, -1):
        t = times[i]
        k1 = f(t, yk)
        k2 = f(t - h / 2, yk - h / 2 * k1)
        k3 = f(t - h / 2, yk - h / 2 * k2)
        k4 = f(t - h, yk - h * k3)
        yk = yk - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.isfinite(yk) or (abort is not None and abort(yk)):
            raise NumericalError(f"backward RK4 blew up at t={times[i - 1]:.6g} (value {yk:.6g})")
        y[i - 1] = yk
    return times, y


def trapezoid(values, grid) -> float:
    """Composite trapezoid rule on a possibly non-uniform grid."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if values.shape != grid.shape:
        raise ValueError("values and grid must have matching lengths")
    return float(np.trapezoid(values, grid))


def cumulative_trapezoid(values, grid) -> np.ndarray:
    """Running trapezoid integral, starting at 0 on the first node."""
    values = np.asarray(values, dtype=float)
    grid = np.asarray(grid, dtype=float)
    out = np.zeros_like(values)
    out[1:] = np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(grid))
    return out


def interp_linear(t, knots, values):
    """Piecewise-linear interpolation, held constant outside the knots."""
    return np.interp(t, knots, values)
