"""
Nodal quadrature rule shared by the scan backend and the oracle.

Inside each cell [x_c, x_c + dx] the data is replaced by the Lagrange
interpolant through the `stencil` nodes centred on the cell, and that
polynomial is integrated exactly against the kernel. A stencil of 2 is
the trapezoid-in-cell rule; 6 (the default) is accurate to O(dx^6).
"""
from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from numerics.exceptions import BackendError

GAUSS_POINTS = 16


def check_stencil(stencil: int) -> int:
    if stencil < 2 or stencil % 2:
        raise BackendError(f'Cell stencil must be an even number >= 2, got {stencil}')
    return int(stencil)


def stencil_offsets(stencil: int) -> np.ndarray:
    """Node offsets (in cells) relative to the left edge of the cell."""
    half = stencil // 2
    return np.arange(-(half - 1), half + 1, dtype=float)


def lagrange_basis(s: np.ndarray, stencil: int) -> np.ndarray:
    """Values of the stencil's Lagrange basis at s (cell units), shape (stencil, len(s))."""
    nodes = stencil_offsets(stencil)
    s = np.asarray(s, dtype=float)
    basis = np.ones((stencil, s.size))
    for q, node in enumerate(nodes):
        for m, other in enumerate(nodes):
            if m != q:
                basis[q] *= (s - other) / (node - other)
    return basis


@lru_cache(maxsize=32)
def gauss_rule() -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre points and weights mapped to [0, 1]."""
    points, weights = leggauss(GAUSS_POINTS)
    return 0.5 * (points + 1.0), 0.5 * weights


@lru_cache(maxsize=64)
def exponential_cell_weights(decay: float, dx: float, stencil: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Weights of the stencil nodes for one cell of the two sweeps.

    left[q]  = ∫_0^dx e^{-α(dx-τ)} ℓ_q(τ) dτ   (cell to the left of the output node)
    right[q] = ∫_0^dx e^{-ατ} ℓ_q(τ) dτ        (cell to the right of the output node)
    """
    stencil = check_stencil(stencil)
    s, w = gauss_rule()
    basis = lagrange_basis(s, stencil)
    tau = s * dx
    left = dx * basis @ (w * np.exp(-decay * (dx - tau)))
    right = dx * basis @ (w * np.exp(-decay * tau))
    left.setflags(write=False)
    right.setflags(write=False)
    return left, right
