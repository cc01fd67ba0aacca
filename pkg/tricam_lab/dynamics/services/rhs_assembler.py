"""
Right-hand side of the nonlocal hyperbolic form.

    4b - b_xx = a_xx c_x - c_xx a_x + 3a_x c - 3a c_x
    a_t = a_x b + ½ ∂G₁∗f₁ + ½ G₁∗g₁
    c_t = c_x b + ½ ∂G₁∗f₂ + ½ G₁∗g₂

Everything runs on raw (2, n) arrays holding a and c so the derivatives
and convolutions of both components go through one transform each.
The Field-level functions at the bottom wrap a default assembler.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from config import settings
from numerics.field import (
    Field,
    Grid1D,
    derivative_values,
    ensure_finite,
    second_derivative_values,
    two_thirds_filter,
)
from numerics.kernels import G1, G1_DX, G2, BackendLike, apply_kernel, get_backend
from dynamics.state import Rhs, State

logger = logging.getLogger('solver')


class RhsAssembler:
    """
    Builds b, the forcing terms and the time derivatives for one
    choice of convolution backend, derivative backend and dealiasing.
    """

    def __init__(self, backend: BackendLike = None, derivative_backend: Optional[str] = None,
                 dealias: bool = False) -> None:
        self.backend = get_backend(backend)
        self.derivative_backend = derivative_backend or settings.DEFAULT_DERIVATIVE_BACKEND
        self.dealias = dealias

    def __repr__(self) -> str:
        return (f'RhsAssembler(backend={self.backend!r}, '
                f'derivative={self.derivative_backend}, dealias={self.dealias})')

    # building blocks

    def d(self, values: np.ndarray, grid: Grid1D) -> np.ndarray:
        return derivative_values(values, grid, self.derivative_backend)

    def dd(self, values: np.ndarray, grid: Grid1D) -> np.ndarray:
        return second_derivative_values(values, grid, self.derivative_backend)

    def product(self, values: np.ndarray, grid: Grid1D) -> np.ndarray:
        """Hook applied to every nonlinear product (2/3 rule when dealiasing)."""
        if self.dealias:
            return two_thirds_filter(values, grid)
        return values

    def conv(self, values: np.ndarray, grid: Grid1D, kernel) -> np.ndarray:
        return apply_kernel(values, grid, kernel, self.backend)

    # elliptic constraint

    def elliptic_source(self, a: np.ndarray, c: np.ndarray, grid: Grid1D) -> np.ndarray:
        """a_xx c_x - c_xx a_x + 3(a_x c - a c_x); antisymmetric in (a, c)."""
        first = self.d(np.vstack([a, c]), grid)
        second = self.dd(np.vstack([a, c]), grid)
        ax, cx = first
        axx, cxx = second
        return self.product(axx * cx - cxx * ax + 3.0 * (ax * c - a * cx), grid)

    def elliptic_source_alternative(self, a: np.ndarray, c: np.ndarray, grid: Grid1D) -> np.ndarray:
        """a_x w - c_x u + 2(a_x c - a c_x) with u = a - a_xx, w = c - c_xx."""
        ax, cx = self.d(np.vstack([a, c]), grid)
        axx, cxx = self.dd(np.vstack([a, c]), grid)
        u = a - axx
        w = c - cxx
        return self.product(ax * w - cx * u + 2.0 * (ax * c - a * cx), grid)

    def recover_b(self, a: np.ndarray, c: np.ndarray, grid: Grid1D) -> np.ndarray:
        return self.conv(self.elliptic_source(a, c, grid), grid, G2)

    def recover_b_alternative(self, a: np.ndarray, c: np.ndarray, grid: Grid1D) -> np.ndarray:
        return self.conv(self.elliptic_source_alternative(a, c, grid), grid, G2)

    # forcing terms

    def forces(self, a: np.ndarray, c: np.ndarray, b: np.ndarray, grid: Grid1D,
               ax: Optional[np.ndarray] = None, cx: Optional[np.ndarray] = None):
        """(f₁, g₁, f₂, g₂) exactly as written, term by term."""
        if ax is None or cx is None:
            ax, cx = self.d(np.vstack([a, c]), grid)
        bx = self.d(b, grid)
        f1 = ax * bx + ax * ax * cx + 3.0 * a * b - 3.0 * ax * a * c
        g1 = b * ax + 3.0 * a * a * c + 3.0 * a * ax * cx
        f2 = bx * cx - ax * cx * cx + 3.0 * b * c + 3.0 * a * c * cx
        g2 = b * cx - 3.0 * a * c * c - 3.0 * ax * c * cx
        p = self.product
        return p(f1, grid), p(g1, grid), p(f2, grid), p(g2, grid)

    # time derivative

    def rhs_values(self, values: np.ndarray, grid: Grid1D) -> Tuple[np.ndarray, np.ndarray]:
        """d/dt of the stacked (a, c) and the b used to get it."""
        a, c = values
        first = self.d(values, grid)
        second = self.dd(values, grid)
        ax, cx = first
        axx, cxx = second
        source = self.product(axx * cx - cxx * ax + 3.0 * (ax * c - a * cx), grid)
        b = self.conv(source, grid, G2)

        f1, g1, f2, g2 = self.forces(a, c, b, grid, ax, cx)
        nonlocal_x = self.conv(np.vstack([f1, f2]), grid, G1_DX)
        nonlocal_0 = self.conv(np.vstack([g1, g2]), grid, G1)
        transport = self.product(first * b, grid)
        return transport + 0.5 * nonlocal_x + 0.5 * nonlocal_0, b

    def rhs(self, s: State) -> Rhs:
        rate, _ = self.rhs_values(s.stacked(), s.grid)
        return Rhs(Field(s.grid, rate[0]), Field(s.grid, rate[1]))

    # differentiated forms used by the space-time variation

    def recover_b_rate(self, a: np.ndarray, c: np.ndarray, a_t: np.ndarray, c_t: np.ndarray,
                       grid: Grid1D) -> np.ndarray:
        """b_t from bilinearity of the elliptic source in (a, c)."""
        source = self.elliptic_source(a_t, c, grid) + self.elliptic_source(a, c_t, grid)
        return self.conv(source, grid, G2)

    def slope_rate(self, a: np.ndarray, c: np.ndarray, b: np.ndarray,
                   grid: Grid1D) -> np.ndarray:
        """
        Stacked (a_xt, c_xt), using ∂ₓₓG₁∗f = G₁∗f - f:
            a_xt = a_xx b + a_x b_x + ½(G₁∗f₁ - f₁) + ½ ∂G₁∗g₁
        """
        values = np.vstack([a, c])
        first = self.d(values, grid)
        second = self.dd(values, grid)
        bx = self.d(b, grid)
        f1, g1, f2, g2 = self.forces(a, c, b, grid, first[0], first[1])
        f = np.vstack([f1, f2])
        g = np.vstack([g1, g2])
        transport = self.product(second * b + first * bx, grid)
        return transport + 0.5 * (self.conv(f, grid, G1) - f) + 0.5 * self.conv(g, grid, G1_DX)


def _check_pair(a: Field, c: Field) -> None:
    ensure_finite(a, 'a')
    ensure_finite(c, 'c')
    if a.grid != c.grid:
        raise ValueError('a and c live on different grids')


_default = None


def default_assembler() -> RhsAssembler:
    global _default
    if _default is None:
        _default = RhsAssembler()
    return _default


def recover_b(a: Field, c: Field, assembler: Optional[RhsAssembler] = None) -> Field:
    """b = G₂∗(a_xx c_x - c_xx a_x + 3a_x c - 3a c_x)."""
    _check_pair(a, c)
    assembler = assembler or default_assembler()
    return Field(a.grid, assembler.recover_b(a.values, c.values, a.grid))


def recover_b_alternative(a: Field, c: Field, assembler: Optional[RhsAssembler] = None) -> Field:
    """b = G₂∗(a_x w - c_x u + 2a_x c - 2a c_x); equal to recover_b up to roundoff."""
    _check_pair(a, c)
    assembler = assembler or default_assembler()
    return Field(a.grid, assembler.recover_b_alternative(a.values, c.values, a.grid))


def elliptic_source(a: Field, c: Field, assembler: Optional[RhsAssembler] = None) -> Field:
    _check_pair(a, c)
    assembler = assembler or default_assembler()
    return Field(a.grid, assembler.elliptic_source(a.values, c.values, a.grid))


def assemble_f1_g1(a: Field, c: Field, b: Field,
                   assembler: Optional[RhsAssembler] = None) -> Tuple[Field, Field]:
    _check_pair(a, c)
    assembler = assembler or default_assembler()
    f1, g1, _, _ = assembler.forces(a.values, c.values, b.values, a.grid)
    return Field(a.grid, f1), Field(a.grid, g1)


def assemble_f2_g2(a: Field, c: Field, b: Field,
                   assembler: Optional[RhsAssembler] = None) -> Tuple[Field, Field]:
    _check_pair(a, c)
    assembler = assembler or default_assembler()
    _, _, f2, g2 = assembler.forces(a.values, c.values, b.values, a.grid)
    return Field(a.grid, f2), Field(a.grid, g2)


def rhs(s: State, assembler: Optional[RhsAssembler] = None) -> Rhs:
    return (assembler or default_assembler()).rhs(s)


def compute_u(a: Field, derivative_backend: Optional[str] = None) -> Field:
    """u = a - a_xx."""
    ensure_finite(a, 'a')
    return Field(a.grid, a.values - second_derivative_values(a.values, a.grid, derivative_backend))


def compute_w(c: Field, derivative_backend: Optional[str] = None) -> Field:
    """w = c - c_xx."""
    ensure_finite(c, 'c')
    return Field(c.grid, c.values - second_derivative_values(c.values, c.grid, derivative_backend))
