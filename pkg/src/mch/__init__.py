"""Pseudospectral solver and diagnostics for the modified Camassa-Holm equation
``m_t + (u^2 - u_x^2) m_x + 2 u_x m^2 + gamma u_x = 0``, ``m = u - u_xx``."""
from .grid import BoundaryDecayWarning, Field, Grid, dealias, helmholtz_inv, make_grid, spectral_deriv
from .kernels import BACKEND
from .model import ConservedSet, NonFiniteError, SolverState, conserved, m_from_u, rhs_nonlocal, rhs_transport, u_from_m
from .timestep import StepControl, Termination, Trajectory, simulate, step_rk4

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BoundaryDecayWarning", "ConservedSet", "Field", "Grid", "NonFiniteError",
    "SolverState", "StepControl", "Termination", "Trajectory", "conserved", "dealias",
    "helmholtz_inv", "m_from_u", "make_grid", "rhs_nonlocal", "rhs_transport", "simulate",
    "spectral_deriv", "step_rk4", "u_from_m",
]
