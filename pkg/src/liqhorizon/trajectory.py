from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Termination:
    """How a liquidation run ended: ``kind`` is ``"horizon"``, ``"barrier"`` or ``"event"``."""

    kind: str
    time: float
    inventory: float


@dataclass(frozen=True)
class Trajectory:
    """Inventory and selling rate sampled on a time grid.

    ``value_coeff`` holds the model's quadratic value coefficient at each node
    (``c``, ``c_tilde`` or ``h``) when the strategy comes from dynamic
    programming. ``constrained`` is False when the liquidity condition fails,
    in which case the strategy solves only the unconstrained problem.
    """

    times: np.ndarray
    inventory: np.ndarray
    rate: np.ndarray
    terminal_inventory: float
    value_coeff: Optional[np.ndarray] = None
    constrained: bool = True
    termination: Optional[Termination] = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a non-empty 1-d array")
        if t[0] != 0.0:
            raise ValueError("times must start at 0")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        for name in ("inventory", "rate"):
            if np.shape(getattr(self, name)) != t.shape:
                raise ValueError(f"{name} must match the shape of times")

    @property
    def relative_rate(self) -> np.ndarray:
        """theta/X where X > 0, NaN elsewhere."""
        x = np.asarray(self.inventory, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(x > 0, np.asarray(self.rate) / x, np.nan)
