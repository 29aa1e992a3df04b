"""Numerical laboratory for a Martinet-type planar isoperimetric problem."""

from .core import (HorizontalCurve, PlanarCurve, StructureParams, apply_phi,
                   beta_values, curve_length, eval_P, eval_Ptilde, eval_Q,
                   gamma, gamma_length, holonomy, lift, project,
                   reference_holonomy_target, reference_profile,
                   resample_arclength)
from .kernels import NUMBA_ENABLED, backend_name

__all__ = [
    "HorizontalCurve", "PlanarCurve", "StructureParams", "apply_phi",
    "beta_values", "curve_length", "eval_P", "eval_Ptilde", "eval_Q",
    "gamma", "gamma_length", "holonomy", "lift", "project",
    "reference_holonomy_target", "reference_profile", "resample_arclength",
    "NUMBA_ENABLED", "backend_name",
]

__version__ = "0.1.0"
