"""Particle paths of the velocity ``u^2 - u_x^2`` and the checks built on them."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .grid import BoundaryDecayWarning, Grid, evaluate_at
from .model import nonlocal_rhs_array
from .timestep import Trajectory


@dataclass(frozen=True)
class FlowMap:
    labels: np.ndarray  # initial positions x0_j
    times: np.ndarray
    positions: np.ndarray  # (len(times), len(labels))
    deformation: np.ndarray  # q_x, same shape

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.positions, axis=1) > 0))


class _Sampler:
    """u, u_x and m at off-grid points from rfft coefficients of u."""

    def __init__(self, grid: Grid):
        self.grid = grid
        self.ops = np.stack([np.ones_like(grid.rdiff1), grid.rdiff1, 1.0 + grid.rxi**2])

    def __call__(self, uh, points):
        u, ux, m = evaluate_at(self.grid, self.ops * uh, points)
        return u, ux, m

    def velocity(self, uh, q, qx):
        u, ux, m = self(uh, q)
        return u * u - ux * ux, 2.0 * m * ux * qx


def _require_steps(traj: Trajectory):
    if traj.steps is None or len(traj.steps) < 2:
        raise ValueError("flow integration needs a trajectory stored at every accepted step")
    return traj.steps


def evolve_flow(traj: Trajectory, labels) -> FlowMap:
    """RK4 for ``dq/dt = (u^2 - u_x^2)(t, q)`` and ``d(q_x)/dt = 2 (m u_x)(t, q) q_x``.

    One RK4 step per accepted solver step; the midpoint field is the cubic
    Hermite interpolant built from the stored states and their time derivatives.
    """
    steps = _require_steps(traj)
    g = traj.grid
    labels = np.asarray(labels, dtype=float)
    mask = g.dealias_table(traj.control.exponential_filter)
    sample = _Sampler(g)
    coeffs = [np.fft.rfft(s.u.values) for s in steps]
    rates = [np.fft.rfft(nonlocal_rhs_array(g, s.u.values, traj.gamma, mask)) for s in steps]
    times = np.array([s.t for s in steps])
    q = labels.copy()
    qx = np.ones_like(q)
    pos = [q.copy()]
    dfm = [qx.copy()]
    warned = False
    for i in range(len(steps) - 1):
        h = times[i + 1] - times[i]
        a, b = coeffs[i], coeffs[i + 1]
        mid = 0.5 * (a + b) + (h / 8.0) * (rates[i] - rates[i + 1])
        k1, l1 = sample.velocity(a, q, qx)
        k2, l2 = sample.velocity(mid, q + 0.5 * h * k1, qx + 0.5 * h * l1)
        k3, l3 = sample.velocity(mid, q + 0.5 * h * k2, qx + 0.5 * h * l2)
        k4, l4 = sample.velocity(b, q + h * k3, qx + h * l3)
        q = q + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        qx = qx + (h / 6.0) * (l1 + 2 * l2 + 2 * l3 + l4)
        if not (np.all(np.isfinite(q)) and np.all(np.isfinite(qx))):
            raise FloatingPointError("non-finite particle position")
        if not warned and np.max(np.abs(q)) > 0.9 * g.L:
            warnings.warn("particles reached the outer tenth of the box", BoundaryDecayWarning)
            warned = True
        pos.append(q.copy())
        dfm.append(qx.copy())
    return FlowMap(labels, times, np.array(pos), np.array(dfm))


def momentum_along(traj: Trajectory, flow: FlowMap) -> np.ndarray:
    """``m(t_i, q(t_i, x0_j))`` on the flow's time grid."""
    steps = _require_steps(traj)
    sample = _Sampler(traj.grid)
    return np.array(
        [sample(np.fft.rfft(s.u.values), q)[2] for s, q in zip(steps, flow.positions)]
    )


def lagrangian_invariant_error(traj: Trajectory, flow: FlowMap) -> float:
    """``max |m(t, q) q_x - m0(x0)|`` over labels and stored times (needs gamma = 0)."""
    if traj.gamma != 0:
        raise ValueError("the momentum invariant along particle paths requires gamma = 0")
    mq = momentum_along(traj, flow)
    m0 = mq[0]
    return float(np.max(np.abs(mq * flow.deformation - m0[None, :])))


def sign_preservation_check(traj: Trajectory, tol: float = 1e-10) -> float:
    """Most negative value of ``m`` over the run (theory: stays >= 0)."""
    if traj.gamma != 0:
        raise ValueError("sign preservation is only asserted for gamma = 0")
    if traj.records[0].min_m < -tol:
        raise ValueError(f"initial momentum has a negative lobe ({traj.records[0].min_m:.3g})")
    return float(min(r.min_m for r in traj.records))


def support_leak(traj: Trajectory, a: float, b: float) -> float:
    """Largest mass of ``|m|`` outside ``[q(t,a), q(t,b)]`` over stored times."""
    if not a < b:
        raise ValueError("need a < b")
    flow = evolve_flow(traj, [a, b])
    g = traj.grid
    worst = 0.0
    for s, (qa, qb) in zip(traj.steps, flow.positions):
        outside = (g.x < qa) | (g.x > qb)
        worst = max(worst, float(np.sum(np.abs(s.m.values[outside])) * g.dx))
    return worst
