"""Model constants, linear Almgren-Chriss impact functions and the running reward.

Units are documented, not enforced: prices per share, time in days, rates in
shares per day.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class ImpactParams:
    """Impact, risk and penalty constants shared by all three models.

    Defaults are the desk example used throughout: one day, 100 units,
    gamma=0.1, sigma=0.2, eta=0.001, nu=0.003, and a terminal penalty of 0.1.
    """

    eta: float = 0.001
    nu: float = 0.003
    gamma: float = 0.1
    sigma: float = 0.2
    phi: float = 0.1
    T: float = 1.0
    Q: float = 100.0
    s0: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{f.name} must be a finite number, got {value!r}")
        if self.eta < 0:
            raise ValueError("eta must be >= 0")
        if self.nu <= 0:
            raise ValueError("nu must be > 0")
        if self.gamma <= 0:
            raise ValueError("gamma must be > 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")
        if self.phi < 0:
            raise ValueError("phi must be >= 0")
        if self.T <= 0:
            raise ValueError("T must be > 0")
        if self.Q <= 0:
            raise ValueError("Q must be > 0")
        if self.s0 < 0:
            raise ValueError("s0 must be >= 0")

    @property
    def liquidity_dominance(self) -> bool:
        return check_condition_13(self)

    def with_(self, **changes) -> "ImpactParams":
        return replace(self, **changes)


PARAM_KEYS = tuple(f.name for f in fields(ImpactParams))


def permanent_impact(theta, p: ImpactParams):
    """Drift of the mid price caused by selling at rate ``theta``: ``-eta*theta``."""
    return -p.eta * theta


def temporary_impact(theta, p: ImpactParams):
    """Execution-price offset from the mid price: ``-nu*theta``."""
    return -p.nu * theta


def running_cost(theta, q, p: ImpactParams):
    """Instantaneous reward ``g(theta)*theta + f(theta)*q - gamma*sigma^2*q^2``.

    Non-positive for non-negative rate and inventory.
    """
    return -p.nu * theta * theta - p.eta * q * theta - p.gamma * p.sigma**2 * q * q


def liquidity_threshold(p: ImpactParams) -> float:
    """Smallest penalty strictly above which the liquidity condition holds (in units of 2*phi)."""
    return p.eta + 2.0 * p.sigma * math.sqrt(p.gamma * p.nu)


def check_condition_13(p: ImpactParams) -> bool:
    """True iff ``2*phi > eta + 2*sigma*sqrt(gamma*nu)``.

    Under this condition the unconstrained optimal strategies of all three
    models sell at non-negative rates and never oversell.
    """
    return 2.0 * p.phi > liquidity_threshold(p)


def uniform_grid(T: float, n_steps: int = 1000) -> np.ndarray:
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    return np.linspace(0.0, T, n_steps + 1)


def check_grid(grid, T: float) -> np.ndarray:
    """Validate a sample grid: 1-d, strictly increasing, inside ``[0, T]``."""
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ValueError("grid must be a non-empty 1-d sequence")
    if g[0] < 0 or g[-1] > T:
        raise ValueError(f"grid must lie in [0, {T}]")
    if g.size > 1 and np.any(np.diff(g) <= 0):
        raise ValueError("grid must be strictly increasing")
    return g


class ConfigError(ValueError):
    """Bad config file or flag value; the message names the offending token."""


def parse_key_values(text: str, source: str = "<config>") -> dict[str, str]:
    """Parse flat ``key=value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key in {line!r}")
        out[key] = value
    return out


def load_params(path: str | Path | None = None, **overrides) -> ImpactParams:
    """Read ImpactParams from a key=value file; keyword overrides win.

    Keys outside ``PARAM_KEYS`` are rejected.
    """
    values: dict[str, float] = {}
    if path is not None:
        path = Path(path)
        for key, raw in parse_key_values(path.read_text(), str(path)).items():
            if key not in PARAM_KEYS:
                raise ConfigError(f"{path}: unknown key {key!r}")
            values[key] = parse_number(raw, key)
    values.update({k: float(v) for k, v in overrides.items() if v is not None})
    return ImpactParams(**values)


def parse_number(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse value {raw!r} for key {key!r}") from None
