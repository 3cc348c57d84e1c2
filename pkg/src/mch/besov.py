"""Discrete Littlewood-Paley blocks, Besov norms and a data-stability experiment."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Field, Grid
from .timestep import StepControl, Termination, simulate

BRIDGE_A = 1.0
BRIDGE_B = 4.0 / 3.0


class CutoffError(ArithmeticError):
    """Tabulated cutoffs violate the dyadic partition identities."""


def _g(t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def chi(xi):
    """Smooth radial low-pass: 1 on ``|xi| <= 1``, 0 beyond ``4/3``."""
    r = np.abs(np.asarray(xi, dtype=float))
    a = _g(BRIDGE_B - r)
    b = _g(r - BRIDGE_A)
    return a / (a + b)


def phi(xi):
    """Annulus cutoff ``chi(xi/2) - chi(xi)``, supported in ``[3/4, 8/3]``."""
    return chi(np.asarray(xi, dtype=float) / 2.0) - chi(xi)


@dataclass(frozen=True, eq=False)
class DyadicSpec:
    """Cutoffs tabulated on a grid's nonnegative wavenumbers (rfft order).

    ``q_max`` is the last block whose support fits inside the band;
    ``q_top >= q_max`` is the last block needed for the partition of unity to
    reach the highest grid wavenumber.  Norms sum blocks ``-1 .. q_top``.
    """

    grid: Grid
    q_max: int
    q_top: int
    tables: dict = field(repr=False)  # q -> multiplier (q = -1 is the low-pass)

    def block_range(self) -> range:
        return range(-1, self.q_top + 1)

    def partition_error(self) -> float:
        total = sum(self.tables[q] for q in self.block_range())
        return float(np.max(np.abs(total - 1.0)))

    def quadratic_sum(self) -> np.ndarray:
        return sum(self.tables[q] ** 2 for q in self.block_range())


def build_cutoffs(grid: Grid) -> DyadicSpec:
    xi = grid.rxi
    xi_max = float(xi[-1])
    q_max = int(math.floor(math.log2(xi_max / (8.0 / 3.0)))) if xi_max >= 8.0 / 3.0 else -1
    q_top = max(0, int(math.ceil(math.log2(xi_max) - 1.0)))
    tables = {-1: chi(xi)}
    for q in range(0, q_top + 1):
        tables[q] = phi(xi / 2.0**q)
    spec = DyadicSpec(grid, q_max, q_top, tables)
    err = spec.partition_error()
    if err > 1e-12:
        raise CutoffError(f"partition of unity fails by {err:.3g}")
    quad = spec.quadratic_sum()
    if quad.min() < 1.0 / 3.0 - 1e-12 or quad.max() > 1.0 + 1e-12:
        raise CutoffError("quadratic partition bound [1/3, 1] fails")
    for q in range(-1, q_top - 1):
        for q2 in range(q + 2, q_top + 1):
            if np.any((tables[q] != 0) & (tables[q2] != 0)):
                raise CutoffError(f"blocks {q} and {q2} overlap")
    return spec


def dyadic_block(f: Field, q: int, spec: DyadicSpec) -> Field:
    if q not in spec.tables:
        raise ValueError(f"block index {q} outside -1..{spec.q_top}")
    g = f.grid
    return Field(g, np.fft.irfft(spec.tables[q] * np.fft.rfft(f.values), n=g.n))


def lp_norm(grid: Grid, v: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(v)))
    return float((np.sum(np.abs(v) ** p) * grid.dx) ** (1.0 / p))


def _check_exponent(name, v):
    if not (v >= 1 or math.isinf(v)) or math.isnan(v):
        raise ValueError(f"{name} must lie in [1, inf], got {v}")


def besov_norm(f: Field, s: float, p: float, r: float, spec: DyadicSpec) -> float:
    _check_exponent("p", p)
    _check_exponent("r", r)
    fh = np.fft.rfft(f.values)
    g = f.grid
    terms = np.array(
        [
            2.0 ** (q * s) * lp_norm(g, np.fft.irfft(spec.tables[q] * fh, n=g.n), p)
            for q in spec.block_range()
        ]
    )
    if math.isinf(r):
        return float(terms.max())
    return float(np.sum(terms**r) ** (1.0 / r))


@dataclass(frozen=True)
class StabilityReport:
    times: np.ndarray
    distance: np.ndarray  # B^{3/2}_{2,1} norm of u - v
    accumulated: np.ndarray  # int_0^t (||u||^2 + ||v||^2 in B^{5/2}_{2,1} + |gamma|)
    C_hat: float
    complete: bool

    def dominated(self, C: float | None = None, rtol: float = 1e-12) -> bool:
        C = self.C_hat if C is None else C
        bound = self.distance[0] * np.exp(C * self.accumulated)
        return bool(np.all(self.distance <= bound * (1 + rtol) + 1e-300))


def stability_experiment(
    u0: Field, v0: Field, gamma: float, ctrl: StepControl, T: float, samples: int = 21
) -> StabilityReport:
    """Run both data to ``T`` and fit the smallest ``C`` with
    ``d(t) <= d(0) exp(C A(t))``."""
    spec = build_cutoffs(u0.grid)
    times = np.linspace(0.0, T, samples)
    c = replace(ctrl, t_end=T)
    tu = simulate(u0, gamma, c, outputs=times)
    tv = simulate(v0, gamma, c, outputs=times)
    k = min(len(tu.snapshots), len(tv.snapshots))
    complete = tu.termination is Termination.REACHED_T_END and tv.termination is Termination.REACHED_T_END
    d = np.array(
        [besov_norm(tu.snapshots[i].u - tv.snapshots[i].u, 1.5, 2, 1, spec) for i in range(k)]
    )
    integrand = np.array(
        [
            besov_norm(tu.snapshots[i].u, 2.5, 2, 1, spec) ** 2
            + besov_norm(tv.snapshots[i].u, 2.5, 2, 1, spec) ** 2
            + abs(gamma)
            for i in range(k)
        ]
    )
    t = times[:k]
    A = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (integrand[1:] + integrand[:-1]))])
    C_hat = 0.0
    if d[0] > 0:
        with np.errstate(divide="ignore"):
            rates = np.log(d[1:] / d[0]) / A[1:]
        if rates.size:
            C_hat = max(0.0, float(np.max(rates)))
    return StabilityReport(t, d, A, C_hat, complete)
