"""Squeezing-enhanced atom-cavity coupling in dissipative coupled cavities."""
__version__ = "0.1.0"

from . import model, operators
from ._backend import BACKEND
from .lindblad import (DensityMatrix, DissipatorSpec, IntegratorConfig, TimeSeries, evolve,
                       extract_period, master_rhs, validate_state)
from .model import SystemParams

__all__ = [
    "BACKEND", "DensityMatrix", "DissipatorSpec", "IntegratorConfig", "SystemParams",
    "TimeSeries", "evolve", "extract_period", "master_rhs", "model", "operators",
    "validate_state",
]
