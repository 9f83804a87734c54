"""Optimal liquidation under fixed, random and counterparty-default horizons."""
from . import model1, model2, model3, numerics, sim_engine
from ._backend import NAME as BACKEND
from .errors import DefaultOccurred, NumericalError, SingularSystemError, StabilityError
from .model2 import HazardSpec
from .model3 import FirmValueParams, SolverGrid, ValueSurface
from .params import ConfigError, ImpactParams, check_condition_13
from .trajectory import Termination, Trajectory

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "ConfigError", "DefaultOccurred", "FirmValueParams", "HazardSpec",
    "ImpactParams", "NumericalError", "SingularSystemError", "SolverGrid", "StabilityError",
    "Termination", "Trajectory", "ValueSurface", "check_condition_13",
    "model1", "model2", "model3", "numerics", "sim_engine",
]
