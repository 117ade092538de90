"""Rotating vortex-patch equilibria in the unit disk."""
from ._accel import USE_NUMBA, set_threads
from .geometry import (
    FourierBoundary,
    GeometryError,
    NearDiskDomain,
    SampledCurve,
    eval_near_disk_map,
    eval_outer_map,
)
from .kernels import PatchSource, green_disk, patch_velocity, robin_function, robin_regular_part

__version__ = "0.1.0"

__all__ = [
    "USE_NUMBA",
    "set_threads",
    "FourierBoundary",
    "GeometryError",
    "NearDiskDomain",
    "SampledCurve",
    "eval_near_disk_map",
    "eval_outer_map",
    "PatchSource",
    "green_disk",
    "patch_velocity",
    "robin_function",
    "robin_regular_part",
]
