"""Closed-form initial data: Gaussians, peakons, the two-peakon formula and
positive momentum bumps."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import FILTER_ALPHA, FILTER_ORDER, Field, Grid, helmholtz_inv


@dataclass(frozen=True)
class PeakonSpec:
    """Single peakon of speed ``c``; ``epsilon > 0`` selects a mollified crest."""

    c: float
    epsilon: float = 0.0

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"peakon speed must be positive, got {self.c}")
        if not self.epsilon >= 0:
            raise ValueError("mollification width must be non-negative")

    @property
    def amplitude(self) -> float:
        return math.sqrt(1.5 * self.c)


def gaussian(grid: Grid, amplitude: float = 1.0, width: float = 1.0, center: float = 0.0) -> Field:
    if not width > 0:
        raise ValueError(f"width must be positive, got {width}")
    return Field(grid, amplitude * np.exp(-(((grid.x - center) / width) ** 2)))


def mollify(f: Field, epsilon: float) -> Field:
    """Damp Fourier coefficients by ``exp(-36 (|xi| eps / pi)^16)``."""
    if epsilon == 0:
        return f
    g = f.grid
    damp = np.exp(-FILTER_ALPHA * (g.rxi * epsilon / np.pi) ** (2 * FILTER_ORDER))
    return Field(g, np.fft.irfft(damp * np.fft.rfft(f.values), n=g.n))


def _check_crest(grid: Grid, crest: float, margin: float = 10.0):
    if abs(crest) > grid.L - margin:
        raise ValueError(
            f"crest at {crest:g} is within {margin:g} of the box boundary +-{grid.L:g}"
        )


def peakon(grid: Grid, spec: PeakonSpec, t: float = 0.0, x0: float = 0.0) -> Field:
    crest = x0 + spec.c * t
    _check_crest(grid, crest)
    raw = Field(grid, spec.amplitude * np.exp(-np.abs(grid.x - crest)))
    return mollify(raw, spec.epsilon)


def two_peakon(grid: Grid, c1: float, c2: float, t: float = 0.0) -> Field:
    """The explicit two-peakon expression with its shared exponential phase."""
    if not 0 < c1 < c2:
        raise ValueError(f"need 0 < c1 < c2, got c1={c1}, c2={c2}")
    phase = 3.0 * math.sqrt(c1 * c2) / (c1 - c2) * math.exp((c1 - c2) * t)
    x = grid.x
    _check_crest(grid, c1 * t + phase, margin=5.0)
    _check_crest(grid, c2 * t + phase, margin=5.0)
    u = math.sqrt(1.5 * c1) * np.exp(-np.abs(x - c1 * t - phase)) + math.sqrt(
        1.5 * c2
    ) * np.exp(-np.abs(x - c2 * t - phase))
    return Field(grid, u)


def bump_momentum(grid: Grid, amplitude: float, width: float, center: float = 0.0) -> Field:
    """``u0 = (1 - d^2)^{-1}`` of the Gaussian momentum ``A exp(-((x-x0)/s)^2)``."""
    if not amplitude > 0 or not width > 0:
        raise ValueError("amplitude and width must be positive")
    return helmholtz_inv(gaussian(grid, amplitude, width, center))


def crest_position(f: Field) -> float:
    """Location of the maximum, refined by a parabola through the argmax."""
    v = f.values
    n = v.size
    j = int(np.argmax(v))
    a, b, c = v[(j - 1) % n], v[j], v[(j + 1) % n]
    denom = a - 2.0 * b + c
    shift = 0.0 if denom == 0 else 0.5 * (a - c) / denom
    return float(f.grid.x[j] + shift * f.grid.dx)
