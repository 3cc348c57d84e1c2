"""Quantitative checks on initial data and trajectories: wave-breaking monitor,
existence-time lower bounds, breaking-time upper bounds and rate, weighted
decay norms, the traveling-wave residual and the zero-curvature residual."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import Field, deriv_array, spectral_deriv
from .model import SolverState, m_from_u, transport_rhs_array
from .timestep import Termination, Trajectory

SQRT2 = math.sqrt(2.0)


# --- wave-breaking monitor -------------------------------------------------

@dataclass(frozen=True)
class BlowupMonitor:
    times: np.ndarray
    min_M: np.ndarray
    max_M: np.ndarray
    cumulative: np.ndarray  # int_0^t ||M||_inf
    argmin: np.ndarray

    def final_phase_monotone(self) -> bool:
        """``min M`` decreases at every step after it first drops below
        ``-||M(0)||_inf``."""
        start = max(abs(self.min_M[0]), abs(self.max_M[0]))
        below = np.nonzero(self.min_M < -start)[0]
        if below.size == 0:
            return False
        tail = self.min_M[below[0]:]
        return bool(np.all(np.diff(tail) < 0))


def blowup_monitor(traj: Trajectory) -> BlowupMonitor:
    return BlowupMonitor(
        times=traj.column("t"),
        min_M=traj.column("min_mux"),
        max_M=traj.column("max_mux"),
        cumulative=traj.column("cum_int_mux"),
        argmin=traj.column("argmin_mux"),
    )


def estimate_breaking_time(traj: Trajectory, window: int = 10) -> float:
    """Extrapolate the zero of ``1 / min M`` from a line fit over the last steps.

    Near breaking ``min M`` follows a Riccati law ``M' ~ -2 M^2``, so
    ``1/M`` is close to linear in ``t`` and its zero estimates the breaking time.
    """
    t = traj.column("t")[-window:]
    M = traj.column("min_mux")[-window:]
    if t.size < 3 or np.any(M >= 0):
        raise ValueError("min(m u_x) must be negative over the fit window")
    slope, icpt = np.polyfit(t, 1.0 / M, 1)
    if slope <= 0:
        raise ValueError("1/min(m u_x) is not increasing toward zero")
    return float(-icpt / slope)


@dataclass(frozen=True)
class RateProbe:
    T0: float
    times: np.ndarray
    products: np.ndarray

    @property
    def minimum(self) -> float:
        return float(self.products.min())


def blowup_rate_probe(traj: Trajectory, T0: float | None = None, window: int = 10) -> RateProbe:
    """``(T0 - t) * min M`` over the final ``window`` accepted steps."""
    if traj.termination is not Termination.BLOWUP_DETECTED:
        raise ValueError("rate probe needs a trajectory that stopped on blow-up")
    if T0 is None:
        T0 = estimate_breaking_time(traj, window)
    t = traj.column("t")[-window:]
    M = traj.column("min_mux")[-window:]
    return RateProbe(float(T0), t, (T0 - t) * M)


# --- existence-time lower bounds (a priori sup bounds) ---------------------

@dataclass(frozen=True)
class ExistenceBounds:
    """Lower bound on the lifespan and the matching growth curve for ``||m||_inf``.

    ``form="comparison"`` (default) uses the solution of the comparison ODE
    whose blow-up time is ``T_lower``; ``form="printed"`` keeps the factor 8 in
    the zero-dispersion curve, which is then singular at ``T_lower / 4``.
    """

    gamma: float
    sup_u: float
    sup_ux: float
    sup_uxx: float
    h0: float
    T_lower: float
    form: str = "comparison"

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.T_lower)

    @property
    def curve_horizon(self) -> float:
        if self.unbounded:
            return math.inf
        if self.gamma == 0 and self.form == "printed":
            return 1.0 / (8.0 * self.h0**2)
        return self.T_lower

    def bound_curve(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t >= self.curve_horizon) or np.any(t < 0):
            raise ValueError(f"bound curve is only defined on [0, {self.curve_horizon:g})")
        h0 = self.h0
        if self.gamma == 0:
            k = 8.0 if self.form == "printed" else 2.0
            return h0 / np.sqrt(1.0 - k * h0 * h0 * t)
        g2 = 2.0 * abs(self.gamma)
        return math.sqrt(g2) * h0 / np.sqrt((h0 * h0 + g2) * np.exp(-10.0 * g2 * t) - h0 * h0)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["curve_horizon"] = self.curve_horizon
        return d


def existence_lower_bound(u0: Field, gamma: float, form: str = "comparison") -> ExistenceBounds:
    if form not in ("comparison", "printed"):
        raise ValueError(f"unknown bound form {form!r}")
    su = u0.sup()
    sux = spectral_deriv(u0, 1).sup()
    suxx = spectral_deriv(u0, 2).sup()
    gamma = float(gamma)
    if gamma == 0:
        h0 = 3 * su + 3 * sux + suxx
        T = math.inf if h0 == 0 else 1.0 / (2.0 * h0 * h0)
    else:
        h0 = 2 * su + sux + 2 * suxx
        g = abs(gamma)
        T = math.inf if h0 == 0 else math.log1p(2 * g / (h0 * h0)) / (20 * g)
    return ExistenceBounds(gamma, su, sux, suxx, h0, T, form)


def m_sup_bound_check(traj: Trajectory, bounds: ExistenceBounds) -> float:
    """Worst ratio ``||m(t)||_inf / bound_curve(t)`` over the recorded steps."""
    t = traj.column("t")
    sup_m = traj.column("sup_m")
    if bounds.unbounded:
        return 0.0 if np.all(sup_m == 0) else math.inf
    return float(np.max(sup_m / bounds.bound_curve(t)))


def early_blowup(traj: Trajectory, bounds: ExistenceBounds) -> bool:
    """True if the run stopped on blow-up before the guaranteed lifespan."""
    return traj.termination is Termination.BLOWUP_DETECTED and traj.final_time < bounds.T_lower


# --- breaking-time upper bounds (nonnegative momentum, no dispersion) ------

@dataclass(frozen=True)
class BlowupBounds:
    x0: float
    I0: float
    h1_norm: float
    m0_x0: float
    ux0_x0: float
    C0: float
    C1: float
    C2: float
    cases: tuple
    t_star: float | None
    t_star_star: float | None
    t1: float | None

    @property
    def case(self) -> str:
        return self.cases[0] if self.cases else "none"

    @property
    def bound(self) -> float | None:
        vals = [v for v in (self.t_star, self.t_star_star, self.t1) if v is not None]
        return min(vals) if vals else None

    def as_dict(self) -> dict:
        d = asdict(self)
        d["cases"] = list(self.cases)
        d["case"] = self.case
        d["bound"] = self.bound
        return d


def _probe_values(u0: Field):
    g = u0.grid
    u = u0.values
    ux = deriv_array(g, u, 1)
    m0 = m_from_u(u0).values
    I0 = float(np.sum(u) * g.dx)
    H = math.sqrt(float(np.sum(u * u + ux * ux) * g.dx))
    return ux, m0, I0, H


def case_i_threshold(I0: float, H: float, m0x0: float) -> float:
    return -H * math.sqrt(I0 / m0x0)


def t_star_formula(I0: float, H: float, m0x0: float, ux0: float) -> float | None:
    B = I0 * H * H
    a = -ux0 / B
    disc = a * a - 1.0 / (B * m0x0)
    if disc < 0:
        return None
    return a - math.sqrt(disc)


def case_ii_holds(I0: float, H: float, m0x0: float, ux0: float) -> bool:
    """The second slope condition verbatim, plus ``u0'(x0) < 0``: for a rising
    slope the logarithm is negative and the resulting time is not a bound."""
    if not -I0 < ux0 < 0:
        return False
    lhs = 1.0 / m0x0 - ux0 / (SQRT2 * I0 * H)
    rhs = math.log(I0 / (I0 + ux0)) / (SQRT2 * H)
    return lhs < rhs


def t_star_star_formula(I0: float, H: float, ux0: float) -> float:
    return math.log(I0 / (I0 + ux0)) / (SQRT2 * I0 * H)


def case_iii_function(I0: float, H: float, m0x0: float, ux0: float):
    c = SQRT2 * I0 * H

    def F(t):
        return SQRT2 * (I0 + ux0) / (4.0 * I0 * H) * math.expm1(c * t) - I0 * t + 1.0 / m0x0

    return F


def solve_t1(I0: float, H: float, m0x0: float, ux0: float, tol: float = 1e-12) -> float:
    """Unique root of the decreasing function F on ``[0, inf)`` by bisection."""
    if ux0 > -I0:
        raise ValueError("the root equation is only monotone when u0'(x0) <= -I0")
    F = case_iii_function(I0, H, m0x0, ux0)
    hi = 1.0
    while F(hi) >= 0:
        hi *= 2.0
        if hi > 1e12:
            raise ArithmeticError("no sign change found for F")
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if F(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def blowup_upper_bound(u0: Field, x0: float, gamma: float = 0.0) -> BlowupBounds:
    """Evaluate every breaking-time bound whose hypothesis holds at ``x0``.

    ``x0`` is snapped to the nearest grid node.
    """
    if gamma != 0:
        raise ValueError("breaking-time upper bounds need gamma = 0")
    g = u0.grid
    ux, m0, I0, H = _probe_values(u0)
    # round-off of (1 - d^2) at fine grids scales with the amplitude
    if m0.min() < -1e-10 * max(1.0, float(np.abs(m0).max())):
        raise ValueError(f"momentum must be nonnegative (min {m0.min():.3g})")
    j = int(np.argmin(np.abs(g.x - x0)))
    m0x0, ux0 = float(m0[j]), float(ux[j])
    if not m0x0 > 0:
        raise ValueError("momentum must be positive at the probe point")
    cases = []
    t_star = t_ss = t1 = None
    if ux0 < case_i_threshold(I0, H, m0x0):
        t_star = t_star_formula(I0, H, m0x0, ux0)
        if t_star is not None:
            cases.append("i")
    if case_ii_holds(I0, H, m0x0, ux0):
        cases.append("ii")
        t_ss = t_star_star_formula(I0, H, ux0)
    if ux0 <= -I0:
        cases.append("iii")
        t1 = solve_t1(I0, H, m0x0, ux0)
    return BlowupBounds(
        x0=float(g.x[j]), I0=I0, h1_norm=H, m0_x0=m0x0, ux0_x0=ux0, C0=-ux0,
        C1=SQRT2 * I0 * H, C2=SQRT2 * I0 * I0 * H, cases=tuple(cases),
        t_star=t_star, t_star_star=t_ss, t1=t1,
    )


def best_probe_point(u0: Field, case: str = "i") -> float | None:
    """Grid node minimising the bound of the given case among nodes where its
    hypothesis holds; ``None`` if there is none."""
    ux, m0, I0, H = _probe_values(u0)
    best, where = math.inf, None
    for j in np.nonzero(m0 > 1e-8 * m0.max())[0]:
        mj, uj = float(m0[j]), float(ux[j])
        val = None
        if case == "i" and uj < case_i_threshold(I0, H, mj):
            val = t_star_formula(I0, H, mj, uj)
        elif case == "ii" and case_ii_holds(I0, H, mj, uj):
            val = t_star_star_formula(I0, H, uj)
        elif case == "iii" and uj <= -I0:
            val = solve_t1(I0, H, mj, uj)
        if val is not None and val < best:
            best, where = val, float(u0.grid.x[j])
    return where


@dataclass(frozen=True)
class ThresholdComparison:
    """Slope thresholds of the two breaking criteria at a probe point."""

    I0: float
    h1_norm: float
    m0_x0: float
    current: float  # ||u0||_H1 sqrt(I0 / m0(x0))
    earlier: float  # sqrt(sqrt2 ||u0||_H1^3 / m0(x0))

    @property
    def current_is_weaker_requirement(self) -> bool:
        return self.current < self.earlier


def threshold_comparison(u0: Field, x0: float) -> ThresholdComparison:
    _, m0, I0, H = _probe_values(u0)
    j = int(np.argmin(np.abs(u0.grid.x - x0)))
    mj = float(m0[j])
    if not mj > 0:
        raise ValueError("momentum must be positive at the probe point")
    return ThresholdComparison(I0, H, mj, H * math.sqrt(I0 / mj), math.sqrt(SQRT2 * H**3 / mj))


# --- weighted decay norms ---------------------------------------------------

@dataclass(frozen=True)
class WeightProfile:
    theta: float
    N: float

    def __post_init__(self):
        if not self.theta > 0:
            raise ValueError(f"decay rate must be positive, got {self.theta}")
        if not self.theta * self.N < math.log(np.finfo(float).max):
            raise ValueError("exp(theta * N) overflows")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(self.theta * np.clip(x, 0.0, self.N))

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > 0) & (x < self.N)
        return np.where(inside, self.theta * self(x), 0.0)


def persistence_norms(state: SolverState, w: WeightProfile) -> tuple[float, float]:
    g = state.grid
    phi = w(g.x)
    ux = deriv_array(g, state.u.values, 1)
    return float(np.max(phi * np.abs(state.u.values))), float(np.max(phi * np.abs(ux)))


def tail_exponent(f: Field, a: float = 5.0, b: float = 15.0) -> float:
    """Rate ``k`` of the best fit ``|f| ~ C exp(-k x)`` on ``[a, b]``."""
    x = f.grid.x
    sel = (x >= a) & (x <= b)
    v = np.abs(f.values[sel])
    if np.any(v <= 0):
        raise ValueError("field vanishes inside the fit window")
    slope, _ = np.polyfit(x[sel], np.log(v), 1)
    return float(-slope)


# --- traveling waves ---------------------------------------------------------

@dataclass(frozen=True)
class TravelingWaveProbe:
    c: float
    residual_pde: Field
    residual_identity: Field

    @property
    def pde_norm(self) -> float:
        return self.residual_pde.sup()

    @property
    def identity_norm(self) -> float:
        return self.residual_identity.sup()


def traveling_wave_residual(profile: Field, c: float) -> TravelingWaveProbe:
    """Residuals of ``c (phi - phi'') = (phi^2 - phi'^2)(phi - phi'')`` and of
    ``phi^2 - phi'^2 = c`` for a candidate profile."""
    g = profile.grid
    p = profile.values
    p1 = deriv_array(g, p, 1)
    m = p - deriv_array(g, p, 2)
    w = p * p - p1 * p1
    return TravelingWaveProbe(float(c), Field(g, c * m - w * m), Field(g, w - c))


# --- zero-curvature residual ---------------------------------------------------

LAX_FORMS = ("consistent", "printed")


def lax_Q(lam: float, gamma: float, form: str = "consistent") -> float:
    q2 = 1.0 - 0.5 * lam * lam * gamma if form == "consistent" else 1.0 + lam * lam * gamma
    if not q2 > 0:
        raise ValueError(f"Q^2 = {q2:g} is not positive for lambda={lam}, gamma={gamma}")
    return math.sqrt(q2)


def _lax_residual_state(state: SolverState, lam: float, form: str, mask) -> float:
    g = state.grid
    u, m = state.u.values, state.m.values
    ux = deriv_array(g, u, 1)
    Q = lax_Q(lam, state.gamma, form)
    w = u * u - ux * ux
    mt = transport_rhs_array(g, u, m, state.gamma, mask)
    pref = 1.0 if form == "consistent" else -0.5
    U = 0.5 * np.array([[-Q + 0 * u, lam * m], [-lam * m, Q + 0 * u]])
    V = pref * np.array(
        [
            [Q / lam**2 + 0.5 * Q * w, -(u - Q * ux) / lam - 0.5 * lam * w * m],
            [(u + Q * ux) / lam + 0.5 * lam * w * m, -Q / lam**2 - 0.5 * Q * w],
        ]
    )
    Ut = 0.5 * np.array([[0 * u, lam * mt], [-lam * mt, 0 * u]])
    Vx = np.array([[deriv_array(g, V[i, j], 1) for j in range(2)] for i in range(2)])
    comm = np.einsum("ikx,kjx->ijx", U, V) - np.einsum("ikx,kjx->ijx", V, U)
    R = Ut - Vx + comm
    return float(np.max(np.abs(R)))


def zero_curvature_residual(traj: Trajectory, lam: float, form: str = "consistent") -> float:
    """Largest entry of ``U_t - V_x + [U, V]`` over the stored snapshots, with
    ``U_t`` taken from the transport law (no time differencing)."""
    if lam == 0:
        raise ValueError("spectral parameter must be nonzero")
    if form not in LAX_FORMS:
        raise ValueError(f"unknown Lax pair form {form!r}")
    lax_Q(lam, traj.gamma, form)
    states = traj.snapshots or ([traj.steps[-1]] if traj.steps else [])
    if not states:
        raise ValueError("trajectory holds no states")
    mask = traj.grid.dealias_table(traj.control.exponential_filter)
    return max(_lax_residual_state(s, lam, form, mask) for s in states)


def zero_curvature_state(state: SolverState, lam: float, form: str = "consistent") -> float:
    if lam == 0:
        raise ValueError("spectral parameter must be nonzero")
    return _lax_residual_state(state, lam, form, state.grid.two_thirds_mask)
