"""Explicit time integration, the simulation driver and the Friedrichs scheme."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import Field, Grid, check_boundary_decay, deriv_array
from .model import (
    ConservedSet,
    NonFiniteError,
    SolverState,
    conserved_arrays,
    nonlocal_rhs_array,
    transport_rhs_array,
)

_TIME_EPS = 1e-12


class DtUnderflowError(ArithmeticError):
    """The error controller asked for a step below ``dt_min``."""


class Termination(str, enum.Enum):
    REACHED_T_END = "reached_t_end"
    BLOWUP_DETECTED = "blowup_detected"
    DT_UNDERFLOW = "dt_underflow"
    NONFINITE = "nonfinite"


@dataclass(frozen=True)
class StepControl:
    """Step-size control and stopping thresholds.

    ``m_max_stop=None`` means ``1e3 * (1 + ||m0||_inf^2)``, resolved when a run
    starts.  ``tail_stop`` (off by default) declares blow-up once the ratio of
    the largest Fourier amplitude of ``m`` in ``n/4 < |k| <= n/3`` to the
    largest overall exceeds it, i.e. when the breaking front is no longer
    resolved by the grid.
    """

    dt_init: float = 1e-3
    dt_min: float = 1e-10
    dt_max: float = 0.05
    error_tol: float = 1e-9
    cfl_fraction: float = 0.5
    m_max_stop: float | None = None
    t_end: float = 1.0
    tail_stop: float | None = None
    exponential_filter: bool = False

    def __post_init__(self):
        if not 0 < self.dt_min <= self.dt_init <= self.dt_max:
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not self.error_tol > 0:
            raise ValueError("error_tol must be positive")
        if self.m_max_stop is not None and not self.m_max_stop > 0:
            raise ValueError("m_max_stop must be positive")
        if not self.cfl_fraction > 0:
            raise ValueError("cfl_fraction must be positive")
        if not self.t_end >= 0:
            raise ValueError("t_end must be non-negative")
        if self.tail_stop is not None and not self.tail_stop > 0:
            raise ValueError("tail_stop must be positive")

    def resolved_m_stop(self, m0: np.ndarray) -> float:
        if self.m_max_stop is not None:
            return self.m_max_stop
        return 1e3 * (1.0 + float(np.max(np.abs(m0))) ** 2)


@dataclass(frozen=True)
class StepRecord:
    t: float
    dt: float
    sup_u: float
    sup_ux: float
    sup_m: float
    min_m: float
    min_mux: float
    max_mux: float
    argmin_mux: float
    cum_int_mux: float
    conserved: ConservedSet
    spectral_tail: float

    def row(self) -> list[float]:
        c = self.conserved
        return [
            self.t, self.dt, self.sup_u, self.sup_ux, self.sup_m, self.min_mux,
            self.max_mux, self.cum_int_mux, c.I0, c.I1, c.I2, c.H0, c.H1,
        ]


TIMESERIES_COLUMNS = (
    "t", "dt", "sup_u", "sup_ux", "sup_m", "min_mux", "max_mux",
    "cum_int_mux", "I0", "I1", "I2", "H0", "H1",
)


@dataclass
class Trajectory:
    grid: Grid
    gamma: float
    control: StepControl
    m_stop: float
    snapshots: list[SolverState] = field(default_factory=list)
    records: list[StepRecord] = field(default_factory=list)
    termination: Termination = Termination.REACHED_T_END
    blowup_reason: str | None = None
    # every accepted state, kept only when requested (characteristics need it)
    steps: list[SolverState] | None = None

    @property
    def final_time(self) -> float:
        return self.records[-1].t

    def column(self, name: str) -> np.ndarray:
        if name in ("I0", "I1", "I2", "H0", "H1"):
            return np.array([getattr(r.conserved, name) for r in self.records])
        return np.array([getattr(r, name) for r in self.records])

    def snapshot_at(self, t: float) -> SolverState:
        for s in self.snapshots:
            if abs(s.t - t) <= 1e-9 * max(1.0, abs(t)):
                return s
        raise KeyError(f"no snapshot at t={t}")

    def relative_drift(self, name: str) -> float:
        v = self.column(name)
        ref = abs(v[0]) if v[0] != 0 else 1.0
        return float(np.max(np.abs(v - v[0])) / ref)


def _rk4(grid, u, dt, gamma, mask):
    k1 = nonlocal_rhs_array(grid, u, gamma, mask)
    k2 = nonlocal_rhs_array(grid, u + 0.5 * dt * k1, gamma, mask)
    k3 = nonlocal_rhs_array(grid, u + 0.5 * dt * k2, gamma, mask)
    k4 = nonlocal_rhs_array(grid, u + dt * k3, gamma, mask)
    out = u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(out)):
        raise NonFiniteError("non-finite state after RK4 step")
    return out


def _m_array(grid, u):
    return np.fft.irfft((1.0 + grid.rxi**2) * np.fft.rfft(u), n=grid.n)


def _state(grid, t, u, gamma, mask):
    u = np.fft.irfft(mask * np.fft.rfft(u), n=grid.n)
    return SolverState(t, Field(grid, u), Field(grid, _m_array(grid, u)), gamma)


def step_rk4(state: SolverState, dt: float, exponential_filter: bool = False) -> SolverState:
    """One classical RK4 step of the nonlocal form; ``m`` is rebuilt from ``u``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    g = state.grid
    mask = g.dealias_table(exponential_filter)
    u = _rk4(g, state.u.values, dt, state.gamma, mask)
    return _state(g, state.t + dt, u, state.gamma, mask)


def cfl_dt(grid: Grid, u: np.ndarray, ctrl: StepControl) -> float:
    ux = deriv_array(grid, u, 1)
    speed = float(np.max(np.abs(u * u - ux * ux)))
    return min(ctrl.dt_max, ctrl.cfl_fraction * grid.dx / max(speed, 1e-12))


def _controlled_step(grid, u, gamma, dt, ctrl, mask):
    """Step-doubling RK4: returns (accepted u, dt used, proposed next dt)."""
    while True:
        full = _rk4(grid, u, dt, gamma, mask)
        half = _rk4(grid, _rk4(grid, u, 0.5 * dt, gamma, mask), 0.5 * dt, gamma, mask)
        err = float(np.max(np.abs(full - half))) / 15.0
        if err <= ctrl.error_tol:
            grow = 2.0 if err == 0 else min(2.0, 0.9 * (ctrl.error_tol / err) ** 0.2)
            return half, dt, dt * max(grow, 1.0)
        dt *= max(0.2, 0.9 * (ctrl.error_tol / err) ** 0.2)
        if dt < ctrl.dt_min:
            raise DtUnderflowError(f"step size fell below dt_min={ctrl.dt_min:g}")


def adapt_dt(state: SolverState, ctrl: StepControl, dt_guess: float | None = None) -> float:
    """Accepted step size from ``state``: the CFL candidate
    ``min(dt_max, cfl * dx / max|u^2 - u_x^2|)`` shrunk by step doubling."""
    g = state.grid
    u = state.u.values
    dt = min(cfl_dt(g, u, ctrl), dt_guess if dt_guess is not None else ctrl.dt_max)
    _, used, _ = _controlled_step(
        g, u, state.gamma, dt, ctrl, g.dealias_table(ctrl.exponential_filter)
    )
    return used


def spectral_tail(grid: Grid, m: np.ndarray) -> float:
    a = np.abs(np.fft.rfft(m))
    top = a.max()
    if top == 0:
        return 0.0
    band = (grid.rk > grid.n / 4) & (grid.rk <= grid.n / 3)
    return float(a[band].max() / top)


def _record(grid, t, dt, u, gamma, cum, prev):
    ux = deriv_array(grid, u, 1)
    m = _m_array(grid, u)
    mux = m * ux
    sup_mux = float(np.max(np.abs(mux)))
    if prev is not None:
        prev_sup = max(abs(prev.min_mux), abs(prev.max_mux))
        cum = cum + 0.5 * dt * (prev_sup + sup_mux)
    rec = StepRecord(
        t=t, dt=dt,
        sup_u=float(np.max(np.abs(u))),
        sup_ux=float(np.max(np.abs(ux))),
        sup_m=float(np.max(np.abs(m))),
        min_m=float(m.min()),
        min_mux=float(mux.min()),
        max_mux=float(mux.max()),
        argmin_mux=float(grid.x[int(np.argmin(mux))]),
        cum_int_mux=cum,
        conserved=conserved_arrays(grid, u, m, gamma),
        spectral_tail=spectral_tail(grid, m),
    )
    return rec, cum


def simulate(
    u0: Field,
    gamma: float,
    ctrl: StepControl,
    outputs: Sequence[float] = (),
    store_steps: bool = False,
) -> Trajectory:
    """Integrate from ``u0`` to ``ctrl.t_end`` or until a stopping rule fires.

    Blow-up is declared when ``min(m u_x) < -m_stop`` or ``||m||_inf > m_stop``
    (and, if enabled, when the spectral tail criterion fires).  Snapshots are
    taken exactly at the requested ``outputs``.
    """
    g = u0.grid
    gamma = float(gamma)
    outs = sorted(set(float(t) for t in outputs))
    if any(t < 0 or t > ctrl.t_end + _TIME_EPS for t in outs):
        raise ValueError("output times must lie in [0, t_end]")
    check_boundary_decay(u0, 1e-10, "initial datum")
    mask = g.dealias_table(ctrl.exponential_filter)
    state = _state(g, 0.0, u0.values, gamma, mask)
    u = state.u.values
    m_stop = ctrl.resolved_m_stop(state.m.values)
    traj = Trajectory(g, gamma, ctrl, m_stop, steps=[state] if store_steps else None)
    rec, cum = _record(g, 0.0, 0.0, u, gamma, 0.0, None)
    traj.records.append(rec)
    pending = [t for t in outs if t > _TIME_EPS]
    if outs and outs[0] <= _TIME_EPS:
        traj.snapshots.append(state)

    t = 0.0
    dt_prop = ctrl.dt_init
    while ctrl.t_end - t > _TIME_EPS * max(1.0, ctrl.t_end):
        target = pending[0] if pending else ctrl.t_end
        dt_try = min(dt_prop, cfl_dt(g, u, ctrl))
        clamped = dt_try >= target - t
        if clamped:
            dt_try = target - t
        try:
            u_new, dt_used, dt_next = _controlled_step(g, u, gamma, dt_try, ctrl, mask)
        except DtUnderflowError:
            traj.termination = Termination.DT_UNDERFLOW
            break
        except NonFiniteError:
            traj.termination = Termination.NONFINITE
            break
        hit = clamped and dt_used == dt_try
        t = target if hit else t + dt_used
        dt_prop = max(dt_next, dt_prop) if hit else dt_next
        u = np.fft.irfft(mask * np.fft.rfft(u_new), n=g.n)
        rec, cum = _record(g, t, dt_used, u, gamma, cum, traj.records[-1])
        traj.records.append(rec)
        if store_steps or (hit and pending):
            st = SolverState(t, Field(g, u), Field(g, _m_array(g, u)), gamma)
            if store_steps:
                traj.steps.append(st)
            if hit and pending:
                traj.snapshots.append(st)
                pending.pop(0)
        if rec.min_mux < -m_stop:
            traj.termination, traj.blowup_reason = Termination.BLOWUP_DETECTED, "min_mux"
            break
        if rec.sup_m > m_stop:
            traj.termination, traj.blowup_reason = Termination.BLOWUP_DETECTED, "sup_m"
            break
        if ctrl.tail_stop is not None and rec.spectral_tail > ctrl.tail_stop:
            traj.termination, traj.blowup_reason = Termination.BLOWUP_DETECTED, "resolution"
            break
    return traj


@dataclass
class PicardSequence:
    """Iterates of the frozen-coefficient transport scheme on a fixed time grid."""

    grid: Grid
    times: np.ndarray
    iterates: list[np.ndarray]  # each (len(times), n): u^{(k)} at every time
    distances: np.ndarray  # d_k = sup_t ||u^{(k+1)} - u^{(k)}||_{H^1}
    cutoffs: list[float]

    def ratios(self) -> np.ndarray:
        d = self.distances
        return d[1:] / d[:-1]


def h1_norm(grid: Grid, v: np.ndarray) -> float:
    vx = deriv_array(grid, v, 1)
    return float(np.sqrt(np.sum(v * v + vx * vx) * grid.dx))


def low_pass(grid: Grid, v: np.ndarray, q: int) -> np.ndarray:
    """Sharp Fourier truncation to ``|xi| <= 2^q``."""
    keep = (grid.rxi <= 2.0**q).astype(float)
    return np.fft.irfft(keep * np.fft.rfft(v), n=grid.n)


def friedrichs_iterate(u0: Field, gamma: float, N: int, ctrl: StepControl) -> PicardSequence:
    """Run the linear transport iteration
    ``(d_t + [(u^n)^2 - (u^n_x)^2] d_x) m^{n+1} = -2 u^n_x (m^n)^2 - gamma u^n_x``
    with ``u^{(0)} = 0`` and ``u^{(n+1)}(0) = S_{n+1} u0``.

    All iterates share the uniform step ``ctrl.dt_init`` on ``[0, ctrl.t_end]``;
    coefficients at RK4 half steps come from cubic Hermite interpolation.
    """
    if N < 2:
        raise ValueError("need at least two iterates")
    g = u0.grid
    mask = g.dealias_table(ctrl.exponential_filter)
    K = max(1, int(math.ceil(ctrl.t_end / ctrl.dt_init - 1e-9)))
    h = ctrl.t_end / K
    times = np.linspace(0.0, ctrl.t_end, K + 1)
    sym = g.rsymbol

    def u_of(m):
        return np.fft.irfft(sym * np.fft.rfft(m), n=g.n)

    def coeffs(u, m):
        ux = deriv_array(g, u, 1)
        return u * u - ux * ux, -2.0 * ux * m * m - gamma * ux

    def rhs(w, src, m):
        mx = deriv_array(g, m, 1)
        r = -w * mx + src
        if not np.all(np.isfinite(r)):
            raise NonFiniteError("non-finite values in transport iterate")
        return np.fft.irfft(mask * np.fft.rfft(r), n=g.n)

    u_prev = np.zeros((K + 1, g.n))
    m_prev = np.zeros((K + 1, g.n))
    iterates = [u_prev]
    cutoffs = []
    dists = []
    for k in range(N):
        q = k + 1
        cutoffs.append(2.0**q)
        m0 = _m_array(g, np.fft.irfft(mask * np.fft.rfft(low_pass(g, u0.values, q)), n=g.n))
        # frozen coefficients at full steps and Hermite-interpolated midpoints
        w_full, s_full = zip(*(coeffs(u_prev[i], m_prev[i]) for i in range(K + 1)))
        w_full, s_full = np.array(w_full), np.array(s_full)
        if k == 0:
            w_mid = np.zeros((K, g.n))
            s_mid = np.zeros((K, g.n))
        else:
            dm = np.array([mdot_prev[i] for i in range(K + 1)])
            m_mid = 0.5 * (m_prev[:-1] + m_prev[1:]) + (h / 8.0) * (dm[:-1] - dm[1:])
            u_mid = np.array([u_of(v) for v in m_mid])
            w_mid, s_mid = map(np.array, zip(*(coeffs(a, b) for a, b in zip(u_mid, m_mid))))
        m_new = np.empty((K + 1, g.n))
        mdot = np.empty((K + 1, g.n))
        m_new[0] = m0
        for i in range(K):
            mi = m_new[i]
            k1 = rhs(w_full[i], s_full[i], mi)
            mdot[i] = k1
            k2 = rhs(w_mid[i], s_mid[i], mi + 0.5 * h * k1)
            k3 = rhs(w_mid[i], s_mid[i], mi + 0.5 * h * k2)
            k4 = rhs(w_full[i + 1], s_full[i + 1], mi + h * k3)
            m_new[i + 1] = mi + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        mdot[K] = rhs(w_full[K], s_full[K], m_new[K])
        u_new = np.array([u_of(v) for v in m_new])
        dists.append(max(h1_norm(g, a - b) for a, b in zip(u_new, u_prev)))
        iterates.append(u_new)
        u_prev, m_prev, mdot_prev = u_new, m_new, mdot
    return PicardSequence(g, times, iterates, np.array(dists), cutoffs)
