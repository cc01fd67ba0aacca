"""
Grid and field substrate.

Uniform 1-D grids, immutable sampled fields, differentiation,
quadrature and norms. Everything else in the lab is built on top
of these few pieces, so they stay small and pure.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from scipy import fft
from scipy.integrate import trapezoid

from config import settings
from numerics.exceptions import (
    BackendError,
    InvalidExponentError,
    InvalidExtentError,
    NonFiniteError,
)

logger = logging.getLogger('numerics')

DERIVATIVE_BACKENDS = ('spectral', 'fd')


@dataclass(frozen=True)
class Grid1D:
    """
    Uniform grid on [x_min, x_max) with n samples.
    The right endpoint is never a node; periodic grids wrap onto x_min.
    """

    x_min: float
    x_max: float
    n: int
    periodic: bool = True

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.n

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @cached_property
    def x(self) -> np.ndarray:
        nodes = self.x_min + np.arange(self.n) * self.dx
        nodes.setflags(write=False)
        return nodes

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Angular wavenumbers of the rfft modes, 2*pi*m/length."""
        k = 2.0 * np.pi * fft.rfftfreq(self.n, d=self.dx)
        k.setflags(write=False)
        return k

    @cached_property
    def odd_mask(self) -> np.ndarray:
        """Mode mask for odd-order symbols: the Nyquist mode has no sign."""
        mask = np.ones(self.n // 2 + 1)
        if self.n % 2 == 0:
            mask[-1] = 0.0
        mask.setflags(write=False)
        return mask

    def contains(self, x: float) -> bool:
        return self.x_min <= x < self.x_max

    def nearest_image(self, x: np.ndarray, centre: float) -> np.ndarray:
        """Signed displacement x - centre folded into [-length/2, length/2)."""
        d = np.asarray(x, dtype=float) - centre
        if not self.periodic:
            return d
        return (d + 0.5 * self.length) % self.length - 0.5 * self.length


def make_grid(x_min: float, x_max: float, n: int, periodic: bool = True) -> Grid1D:
    """Build a grid, rejecting empty extents and tiny sample counts."""
    if not (math.isfinite(x_min) and math.isfinite(x_max)) or x_max <= x_min:
        raise InvalidExtentError(f'x_max must exceed x_min, got [{x_min}, {x_max}]')
    if int(n) != n or n < settings.MIN_GRID_N:
        raise InvalidExtentError(
            f'n must be an integer >= {settings.MIN_GRID_N}, got {n}'
        )
    return Grid1D(float(x_min), float(x_max), int(n), bool(periodic))


@dataclass(frozen=True, eq=False)
class Field:
    """
    Samples of one scalar function on a grid.
    The values array is copied and frozen on construction.
    """

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64).reshape(-1)
        if values.shape[0] != self.grid.n:
            raise ValueError(
                f'Field needs {self.grid.n} samples, got {values.shape[0]}'
            )
        if not np.all(np.isfinite(values)):
            raise NonFiniteError('Field values contain NaN or Inf')
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, grid: Grid1D) -> 'Field':
        return cls(grid, np.zeros(grid.n))

    @classmethod
    def constant(cls, grid: Grid1D, value: float) -> 'Field':
        return cls(grid, np.full(grid.n, float(value)))

    @classmethod
    def from_function(cls, grid: Grid1D, fn: Callable[[np.ndarray], np.ndarray]) -> 'Field':
        """Sample fn at the grid nodes."""
        return cls(grid, fn(grid.x))

    def with_values(self, values: np.ndarray) -> 'Field':
        return Field(self.grid, values)

    def sup(self) -> float:
        return float(np.max(np.abs(self.values)))

    def min(self) -> float:
        return float(np.min(self.values))

    def _other_values(self, other: Union['Field', float]) -> Union[np.ndarray, float]:
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise ValueError('Fields live on different grids')
            return other.values
        return float(other)

    def __add__(self, other):
        return Field(self.grid, self.values + self._other_values(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, self.values - self._other_values(other))

    def __rsub__(self, other):
        return Field(self.grid, self._other_values(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, self.values * self._other_values(other))

    __rmul__ = __mul__

    def __truediv__(self, other: float):
        return Field(self.grid, self.values / float(other))

    def __neg__(self):
        return Field(self.grid, -self.values)

    def __repr__(self) -> str:
        return f'Field(n={self.grid.n}, sup={self.sup():.6g})'


def ensure_finite(f: Field, what: str = 'field') -> None:
    """Guard for operations that take Fields built elsewhere."""
    if not np.all(np.isfinite(f.values)):
        raise NonFiniteError(f'{what} contains NaN or Inf')


def _resolve_backend(backend: Optional[str]) -> str:
    backend = backend or settings.DEFAULT_DERIVATIVE_BACKEND
    if backend not in DERIVATIVE_BACKENDS:
        raise BackendError(f'Unknown derivative backend: {backend}')
    return backend


def spectral_apply(values: np.ndarray, grid: Grid1D, symbol: np.ndarray) -> np.ndarray:
    """
    Multiply the rfft modes by a symbol and transform back.
    Works on the last axis so stacked fields go through one FFT.
    """
    if not grid.periodic:
        raise BackendError('Spectral operators need a periodic grid')
    return fft.irfft(fft.rfft(values, axis=-1) * symbol, n=grid.n, axis=-1)


def _fd_first(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    h = grid.dx
    if grid.periodic:
        return (
            -np.roll(values, -2, axis=-1) + 8.0 * np.roll(values, -1, axis=-1)
            - 8.0 * np.roll(values, 1, axis=-1) + np.roll(values, 2, axis=-1)
        ) / (12.0 * h)
    # 4th order inside, 2nd order one-sided at the two edge nodes each side
    out = np.gradient(values, h, edge_order=2, axis=-1)
    out[..., 2:-2] = (
        -values[..., 4:] + 8.0 * values[..., 3:-1]
        - 8.0 * values[..., 1:-3] + values[..., :-4]
    ) / (12.0 * h)
    return out


def _fd_second(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    h2 = grid.dx ** 2
    if grid.periodic:
        return (
            -np.roll(values, -2, axis=-1) + 16.0 * np.roll(values, -1, axis=-1)
            - 30.0 * values
            + 16.0 * np.roll(values, 1, axis=-1) - np.roll(values, 2, axis=-1)
        ) / (12.0 * h2)
    return _fd_first(_fd_first(values, grid), grid)


def derivative_values(values: np.ndarray, grid: Grid1D,
                      backend: Optional[str] = None) -> np.ndarray:
    """Raw-array first derivative, shared by the solver hot path."""
    backend = _resolve_backend(backend)
    if backend == 'spectral':
        return spectral_apply(values, grid, 1j * grid.wavenumbers * grid.odd_mask)
    return _fd_first(values, grid)


def second_derivative_values(values: np.ndarray, grid: Grid1D,
                             backend: Optional[str] = None) -> np.ndarray:
    backend = _resolve_backend(backend)
    if backend == 'spectral':
        return spectral_apply(values, grid, -grid.wavenumbers ** 2)
    return _fd_second(values, grid)


def derivative(f: Field, backend: Optional[str] = None) -> Field:
    """
    First derivative of a field.
    'spectral' is Fourier differentiation (periodic grids only),
    'fd' is 4th order central differences.
    """
    ensure_finite(f)
    return Field(f.grid, derivative_values(f.values, f.grid, backend))


def second_derivative(f: Field, backend: Optional[str] = None) -> Field:
    """Second derivative; the spectral symbol -k^2 keeps the Nyquist mode."""
    ensure_finite(f)
    return Field(f.grid, second_derivative_values(f.values, f.grid, backend))


def two_thirds_filter(values: np.ndarray, grid: Grid1D) -> np.ndarray:
    """Zero the top third of the modes (2/3 dealiasing rule)."""
    cutoff = (2.0 / 3.0) * grid.wavenumbers[-1]
    return spectral_apply(values, grid, (grid.wavenumbers <= cutoff).astype(float))


def integrate_values(values: np.ndarray, grid: Grid1D) -> float:
    if grid.periodic:
        return float(np.sum(values) * grid.dx)
    return float(trapezoid(values, dx=grid.dx))


def integrate(f: Field) -> float:
    """
    Quadrature over the grid.
    Periodic grids use the plain Riemann sum (spectrally accurate for
    periodic integrands), others the composite trapezoid rule.
    """
    ensure_finite(f)
    return integrate_values(f.values, f.grid)


def lp_norm(f: Field, p: float) -> float:
    """Discrete L^p norm; p = math.inf gives the max norm."""
    p = float(p)
    if math.isnan(p) or p < 1.0:
        raise InvalidExponentError(f'L^p norm needs p >= 1, got {p}')
    ensure_finite(f)
    if math.isinf(p):
        return f.sup()
    return integrate_values(np.abs(f.values) ** p, f.grid) ** (1.0 / p)


def h1_norm(f: Field, backend: Optional[str] = None) -> float:
    """(||f||_2^2 + ||f_x||_2^2)^(1/2)."""
    fx = derivative(f, backend)
    return math.sqrt(lp_norm(f, 2.0) ** 2 + lp_norm(fx, 2.0) ** 2)
