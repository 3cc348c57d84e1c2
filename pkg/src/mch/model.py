"""Right-hand sides of the modified Camassa-Holm equation and its invariants.

The equation is ``m_t + (u^2 - u_x^2) m_x + 2 u_x m^2 + gamma u_x = 0`` with
``m = u - u_xx``.  Two equivalent evolution laws are provided: the nonlocal
form for ``u`` (used by the solver) and the transport form for ``m``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Field, Grid, deriv_array, helmholtz_inv, spectral_deriv


class NonFiniteError(FloatingPointError):
    """A right-hand side or step produced non-finite samples."""


@dataclass(frozen=True, eq=False)
class SolverState:
    t: float
    u: Field
    m: Field
    gamma: float = 0.0

    def __post_init__(self):
        if not (np.isfinite(self.t) and self.t >= 0):
            raise ValueError(f"state time must be finite and non-negative, got {self.t}")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @classmethod
    def from_u(cls, u: Field, gamma: float = 0.0, t: float = 0.0) -> "SolverState":
        return cls(t, u, m_from_u(u), float(gamma))

    def consistency_error(self) -> float:
        return float(np.max(np.abs(m_from_u(self.u).values - self.m.values)))


@dataclass(frozen=True)
class ConservedSet:
    I0: float
    I1: float
    I2: float
    H0: float
    H1: float

    def as_dict(self) -> dict:
        return {"I0": self.I0, "I1": self.I1, "I2": self.I2, "H0": self.H0, "H1": self.H1}


def m_from_u(u: Field) -> Field:
    return u - spectral_deriv(u, 2)


def u_from_m(m: Field) -> Field:
    return helmholtz_inv(m)


def _check_finite(v: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(v)):
        raise NonFiniteError("non-finite values in right-hand side")
    return v


def nonlocal_rhs_array(grid: Grid, u: np.ndarray, gamma: float, mask: np.ndarray) -> np.ndarray:
    """``du/dt`` on raw samples; ``mask`` is the dealiasing table (rfft order)."""
    uh = np.fft.rfft(u)
    ux = np.fft.irfft(grid.rdiff1 * uh, n=grid.n)
    ux2 = ux * ux
    local = (u * u - ux2 / 3.0) * ux
    a = np.fft.rfft((2.0 / 3.0) * u**3 + u * ux2)
    b = np.fft.rfft(ux2 * ux / 3.0)
    if gamma:
        b = b + gamma * grid.rdiff1 * uh
    total = np.fft.rfft(local) + grid.rsymbol * (grid.rdiff1 * a + b)
    return _check_finite(np.fft.irfft(-mask * total, n=grid.n))


def transport_rhs_array(
    grid: Grid, u: np.ndarray, m: np.ndarray, gamma: float, mask: np.ndarray
) -> np.ndarray:
    ux = deriv_array(grid, u, 1)
    mx = deriv_array(grid, m, 1)
    r = -(u * u - ux * ux) * mx - 2.0 * ux * m * m - gamma * ux
    return _check_finite(np.fft.irfft(mask * np.fft.rfft(r), n=grid.n))


def rhs_nonlocal(u: Field, gamma: float, exponential_filter: bool = False) -> Field:
    """``du/dt = -(u^2 - u_x^2/3) u_x - d/dx (1-d^2)^{-1}(2u^3/3 + u u_x^2)
    - (1-d^2)^{-1}(u_x^3/3 + gamma u_x)``, dealiased."""
    g = u.grid
    return Field(g, nonlocal_rhs_array(g, u.values, gamma, g.dealias_table(exponential_filter)))


def rhs_transport(state: SolverState, exponential_filter: bool = False) -> Field:
    """``dm/dt = -(u^2 - u_x^2) m_x - 2 u_x m^2 - gamma u_x``, dealiased."""
    g = state.grid
    return Field(
        g,
        transport_rhs_array(
            g, state.u.values, state.m.values, state.gamma, g.dealias_table(exponential_filter)
        ),
    )


def conserved_arrays(grid: Grid, u: np.ndarray, m: np.ndarray, gamma: float) -> ConservedSet:
    dx = grid.dx
    ux = deriv_array(grid, u, 1)
    u2 = u * u
    ux2 = ux * ux
    i2 = float(np.sum(u2 * u2 + 2.0 * u2 * ux2 - ux2 * ux2 / 3.0 + 2.0 * gamma * u2) * dx)
    return ConservedSet(
        I0=float(np.sum(u) * dx),
        I1=float(np.sum(u2 + ux2) * dx),
        I2=i2,
        H0=float(np.sum(m * u) * dx),
        H1=0.25 * i2,
    )


def conserved(state: SolverState) -> ConservedSet:
    """Trapezoid-rule values of I0, I1, I2 and the Hamiltonians H0, H1."""
    return conserved_arrays(state.grid, state.u.values, state.m.values, state.gamma)
