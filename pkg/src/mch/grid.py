"""Uniform periodic grid, Fourier differentiation and Helmholtz inversion.

The real line is truncated to the periodic box ``[-L, L)``.  Transforms use
numpy's convention: forward unnormalised, inverse divides by ``n``.  The
wavenumber of index ``k`` is ``xi_k = pi * k / L``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels

FILTER_ALPHA = 36.0
FILTER_ORDER = 8


class BoundaryDecayWarning(UserWarning):
    """A field is not negligible at the box boundary."""


@dataclass(frozen=True, eq=False)
class Grid:
    """Periodic grid on ``[-L, L)`` with ``n`` points (a power of two)."""

    half_length: float
    n: int

    def __post_init__(self):
        if not self.half_length > 0 or not np.isfinite(self.half_length):
            raise ValueError(f"half_length must be positive, got {self.half_length}")
        n = int(self.n)
        if n != self.n or n < 16 or n & (n - 1):
            raise ValueError(f"n must be a power of two >= 16, got {self.n}")

    @property
    def L(self) -> float:
        return self.half_length

    @property
    def dx(self) -> float:
        return 2.0 * self.half_length / self.n

    @cached_property
    def x(self) -> np.ndarray:
        x = -self.half_length + self.dx * np.arange(self.n)
        x.flags.writeable = False
        return x

    @cached_property
    def index(self) -> np.ndarray:
        """Integer mode numbers ``k = -n/2 .. n/2-1``."""
        return np.arange(-self.n // 2, self.n // 2)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """``xi_k`` for ``k = -n/2 .. n/2-1``."""
        return np.pi * self.index / self.half_length

    @cached_property
    def helmholtz_symbol(self) -> np.ndarray:
        """``1 / (1 + xi_k^2)`` on the same ordering as :attr:`wavenumbers`."""
        return 1.0 / (1.0 + self.wavenumbers**2)

    # rfft-ordered tables used internally
    @cached_property
    def rk(self) -> np.ndarray:
        return np.arange(self.n // 2 + 1)

    @cached_property
    def rxi(self) -> np.ndarray:
        return np.pi * self.rk / self.half_length

    @cached_property
    def rsymbol(self) -> np.ndarray:
        return 1.0 / (1.0 + self.rxi**2)

    @cached_property
    def rdiff1(self) -> np.ndarray:
        d = 1j * self.rxi
        d[-1] = 0.0  # Nyquist mode has no odd derivative
        return d

    @cached_property
    def two_thirds_mask(self) -> np.ndarray:
        return (self.rk <= self.n / 3).astype(float)

    @cached_property
    def exponential_filter(self) -> np.ndarray:
        eta = self.rk / (self.n / 2)
        return np.exp(-FILTER_ALPHA * eta ** (2 * FILTER_ORDER))

    def dealias_table(self, exponential: bool = False) -> np.ndarray:
        if exponential:
            return self.two_thirds_mask * self.exponential_filter
        return self.two_thirds_mask

    def __repr__(self):
        return f"Grid(L={self.half_length!r}, n={self.n})"


def make_grid(L: float, n: int) -> Grid:
    return Grid(float(L), int(n))


@dataclass(frozen=True, eq=False)
class Field:
    """Real samples of a function on a :class:`Grid`."""

    grid: Grid
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} samples, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field samples must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, grid: Grid, func) -> "Field":
        return cls(grid, func(grid.x))

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.n))

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.dx)

    def _coerce(self, other):
        if isinstance(other, Field):
            if other.grid is not self.grid and (
                other.grid.n != self.grid.n or other.grid.L != self.grid.L
            ):
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return Field(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.grid.n


def _apply_symbol(grid: Grid, v: np.ndarray, symbol: np.ndarray) -> np.ndarray:
    return np.fft.irfft(np.fft.rfft(v) * symbol, n=grid.n)


def deriv_array(grid: Grid, v: np.ndarray, order: int) -> np.ndarray:
    if order not in (1, 2, 3):
        raise ValueError(f"unsupported derivative order {order}")
    ik = grid.rdiff1
    if order == 2:
        symbol = -grid.rxi**2
    else:
        symbol = ik**order
    return _apply_symbol(grid, v, symbol)


def spectral_deriv(f: Field, order: int) -> Field:
    """Trigonometric derivative of order 1, 2 or 3."""
    return Field(f.grid, deriv_array(f.grid, f.values, order))


def helmholtz_inv(f: Field) -> Field:
    """Solve ``(1 - d^2/dx^2) g = f`` on the periodic grid."""
    return Field(f.grid, _apply_symbol(f.grid, f.values, f.grid.rsymbol))


def dealias(f: Field, exponential: bool = False) -> Field:
    """Zero modes with ``|k| > n/3``; optionally apply the order-8 exponential
    filter ``exp(-36 (|k| / (n/2))^16)`` as well."""
    return Field(f.grid, _apply_symbol(f.grid, f.values, f.grid.dealias_table(exponential)))


def boundary_level(f: Field, fraction: float = 1.0 / 32.0) -> float:
    """Largest magnitude over the outer ``fraction`` of the box on each side."""
    n = f.grid.n
    w = max(1, int(n * fraction))
    v = np.abs(f.values)
    return float(max(v[:w].max(), v[-w:].max()))


def check_boundary_decay(f: Field, threshold: float, what: str = "field") -> bool:
    level = boundary_level(f)
    if level > threshold:
        warnings.warn(
            f"{what} reaches {level:.3g} near the box boundary (threshold {threshold:g})",
            BoundaryDecayWarning,
            stacklevel=3,
        )
        return False
    return True


def green_convolve_quadrature(f: Field, derivative: int = 0) -> Field:
    """Real-space quadrature of ``G*f`` (``derivative=0``) or ``G'*f``
    (``derivative=1``) with ``G(x) = exp(-|x|)/2``.

    Independent of the FFT path; the kernel is the real-line one, so the field
    must be negligible near the box boundary (a warning is issued otherwise).
    """
    if derivative not in (0, 1):
        raise ValueError(f"derivative must be 0 or 1, got {derivative}")
    check_boundary_decay(f, 1e-10, "quadrature input")
    g = f.grid
    return Field(g, kernels.green_quadrature(g.x, f.values, g.dx, derivative))


def spectral_coefficients(f: Field) -> np.ndarray:
    return np.fft.rfft(f.values)


def evaluate_at(grid: Grid, coeffs: np.ndarray, points) -> np.ndarray:
    """Trigonometric interpolant(s) with rfft ``coeffs`` evaluated at ``points``."""
    return kernels.trig_eval(coeffs, np.asarray(points, dtype=float), np.pi / grid.L, grid.L)
