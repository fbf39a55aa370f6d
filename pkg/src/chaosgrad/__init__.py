"""Derivatives of long-time-average statistics of chaotic maps.

The library decomposes the parameter derivative of an orbit-averaged
objective into a shadowing part (adjoint shadowing covector against the
parameter forcing) and an unstable part (windowed objective anomaly against
the unstable divergence of the forcing), both sampled on a single orbit
split into renormalized segments.
"""

from . import kernels
from .errors import NumericsError
from .orbit import Orbit, RunConfig, generate_orbit, spin_up
from .response import (FdResult, ResponseResult, compute_response,
                       finite_difference_derivative)
from .systems import MapSystem, get_system, system_names

__version__ = "0.1.0"

__all__ = [
    "FdResult",
    "MapSystem",
    "NumericsError",
    "Orbit",
    "ResponseResult",
    "RunConfig",
    "compute_response",
    "finite_difference_derivative",
    "generate_orbit",
    "get_system",
    "kernels",
    "spin_up",
    "system_names",
    "__version__",
]
