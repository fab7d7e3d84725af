"""Spectral simulation of high-order curvature flows for curves between two parallel lines."""
from .diagnostics import DiagnosticsRecord, fit_decay_rate, psw_check, record, scale_invariant_norm
from .exceptions import *  # noqa: F401,F403
from .flow import FlowConfig, Trajectory, evolve, first_variation_check, rhs, speed, step
from .geometry import (IntrinsicState, PlanarCurve, closure_defects, cosine_state, from_points,
                       reconstruct, winding_number)
from .spectral import CosineField, SineField

__version__ = "0.1.0"
