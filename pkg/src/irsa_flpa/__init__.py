"""Finite-length packet-loss analysis of irregular repetition slotted ALOHA."""

from .asymptotic import DeConfig, asymptotic_plr
from .errors import BudgetExceeded, ConfigError, PreconditionError
from .model import DegreeDistribution, SystemConfig
from .montecarlo import SimConfig, SimEstimate, simulate
from .plr import PlrReport, complexity_estimate, conditional_pmf, exact_plr, mlv_plr, oracle_plr

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "ConfigError",
    "DeConfig",
    "DegreeDistribution",
    "PlrReport",
    "PreconditionError",
    "SimConfig",
    "SimEstimate",
    "SystemConfig",
    "asymptotic_plr",
    "complexity_estimate",
    "conditional_pmf",
    "exact_plr",
    "mlv_plr",
    "oracle_plr",
    "simulate",
]
