"""
Mollifier family.

ρ(x) = exp(1/(x²-1)) on |x| < 1 and zero elsewhere (the value at |x| = 1
is taken as the limit, 0). ρₙ(x) = n·ρ(n·x) is sampled on the grid and
renormalised by its own quadrature sum, so every sampled mollifier has
unit mass to roundoff whatever the resolution.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import fft

from config import settings
from numerics.exceptions import (
    InvalidParameterError,
    OutOfDomainError,
    UnderResolvedSupportError,
)
from numerics.field import (
    Field,
    Grid1D,
    ensure_finite,
    h1_norm,
    integrate_values,
    lp_norm,
    spectral_apply,
)

logger = logging.getLogger('numerics')

# Gauss-Legendre nodes used for the continuous transform of ρ
TRANSFORM_POINTS = 512
TRANSFORM_CHUNK = 4096


def bump(x: np.ndarray) -> np.ndarray:
    """Unnormalised bump ρ; exactly zero for |x| >= 1."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    inside = np.abs(x) < 1.0
    out[inside] = np.exp(1.0 / (x[inside] ** 2 - 1.0))
    return out


def check_index(n) -> int:
    if int(n) != n or n < 1:
        raise InvalidParameterError(f'Mollification index must be a positive integer, got {n}')
    return int(n)


def check_support(width: float, grid: Grid1D, what: str = 'mollifier') -> None:
    """Compact supports need at least MOLLIFIER_MIN_POINTS cells across."""
    needed = settings.MOLLIFIER_MIN_POINTS * grid.dx
    if width < needed:
        raise UnderResolvedSupportError(
            f'{what} support {width:.6g} is narrower than '
            f'{settings.MOLLIFIER_MIN_POINTS} cells ({needed:.6g})'
        )


def max_resolvable_index(grid: Grid1D) -> int:
    """Largest n whose support 2/n still spans MOLLIFIER_MIN_POINTS cells."""
    return int(np.floor(2.0 / (settings.MOLLIFIER_MIN_POINTS * grid.dx) + 1e-12))


def bump_field(grid: Grid1D, centre: float, half_width: float, height: float = 1.0) -> Field:
    """height·ρ((x - centre)/half_width), placed by nearest image."""
    check_support(2.0 * half_width, grid, 'bump')
    return Field(grid, height * bump(grid.nearest_image(grid.x, centre) / half_width))


def mollifier(n: int, grid: Grid1D, centre: float = 0.0) -> Field:
    """Samples of ρₙ(x - centre) with unit discrete mass."""
    n = check_index(n)
    check_support(2.0 / n, grid)
    if not grid.contains(centre):
        raise OutOfDomainError(f'Mollifier centre {centre} lies outside the grid')
    values = n * bump(n * grid.nearest_image(grid.x, centre))
    return Field(grid, values / integrate_values(values, grid))


def _mollifier_symbol(n: int, grid: Grid1D) -> np.ndarray:
    # kernel indexed by node offset from node 0, so the product of
    # transforms is the discrete circular convolution
    offsets = grid.nearest_image(grid.x - grid.x_min, 0.0)
    kernel = n * bump(n * offsets)
    kernel /= integrate_values(kernel, grid)
    return fft.rfft(kernel) * grid.dx


def mollify(f: Field, n: int) -> Field:
    """Periodic convolution ρₙ∗f on the grid of f."""
    ensure_finite(f, 'mollify input')
    n = check_index(n)
    check_support(2.0 / n, f.grid)
    return Field(f.grid, spectral_apply(f.values, f.grid, _mollifier_symbol(n, f.grid)))


@lru_cache(maxsize=1)
def _transform_rule():
    y, w = leggauss(TRANSFORM_POINTS)
    weights = w * bump(y)
    return y, weights / np.sum(weights)


def bump_transform(xi: np.ndarray) -> np.ndarray:
    """
    Fourier transform of the unit-mass ρ at angular frequency xi.
    ρ is even so the transform is real; ρₙ has transform bump_transform(k/n).
    """
    y, weights = _transform_rule()
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    flat = xi.reshape(-1)
    out = np.empty_like(flat)
    for start in range(0, flat.size, TRANSFORM_CHUNK):
        block = flat[start:start + TRANSFORM_CHUNK]
        out[start:start + TRANSFORM_CHUNK] = np.cos(np.outer(block, y)) @ weights
    return out.reshape(xi.shape)


@dataclass(frozen=True)
class MollificationError:
    """Distances between a field and its mollification."""

    n: int
    h1: float
    l1: float
    lp: float
    p: float


def mollification_error(f: Field, n: int, epsilon: Optional[float] = None) -> MollificationError:
    """‖ρₙ∗f - f‖ in H¹, L¹ and L^{1+ε}."""
    epsilon = settings.DEFAULT_EPSILON if epsilon is None else epsilon
    diff = mollify(f, n) - f
    p = 1.0 + epsilon
    result = MollificationError(
        n=int(n),
        h1=h1_norm(diff),
        l1=lp_norm(diff, 1.0),
        lp=lp_norm(diff, p),
        p=p,
    )
    logger.debug('mollification error n=%d h1=%.3e l1=%.3e', n, result.h1, result.l1)
    return result
