"""Single-lamp visible light positioning and communication toolkit."""

from .errors import (ConfigError, DegenerateGeometryError, DomainError, InfeasibleError,
                     VlpcError)
from .scenario import ChannelParams, Scenario, gain_vector, los_gain, triangle_offsets
from .fisher import crlb, crlb_covariance, fim
from .ook import RateContext, delta_threshold, rate_exact, rate_lower_bound
from .positioning import positioning_rmse, solve_position
from .csi import CsiMoments, csi_moments
from .robust import AllocationConfig, bcd_optimize

__version__ = "0.1.0"

__all__ = [
    "AllocationConfig", "ChannelParams", "ConfigError", "CsiMoments", "DegenerateGeometryError",
    "DomainError", "InfeasibleError", "RateContext", "Scenario", "VlpcError", "bcd_optimize",
    "crlb", "crlb_covariance", "csi_moments", "delta_threshold", "fim", "gain_vector",
    "los_gain", "positioning_rmse", "rate_exact", "rate_lower_bound", "solve_position",
    "triangle_offsets",
]
