"""
Direct-quadrature oracle.

Ground truth for the fast backends: builds the nodal weights of the
cell rule against the closed-form periodized kernel and applies them
as a dense O(n²) sum. Capped at ORACLE_MAX_NODES nodes.
"""
from functools import lru_cache
from typing import Optional

import numpy as np

from config import settings
from numerics.exceptions import SizeGuardError
from numerics.field import Grid1D
from numerics.kernels.base_backend import BaseKernelBackend, KernelBackend
from numerics.kernels.cell_rule import check_stencil, gauss_rule, lagrange_basis, stencil_offsets
from numerics.kernels.exp_kernel import ExpKernel


@lru_cache(maxsize=32)
def nodal_weights(grid: Grid1D, kernel: ExpKernel, stencil: int) -> np.ndarray:
    """
    weights[m] is the weight of f_{i+m} in the value at node i.
    Each cell is integrated with Gauss-Legendre; the kernel is smooth
    inside every cell because its kinks sit on nodes.
    """
    n, dx = grid.n, grid.dx
    s, w = gauss_rule()
    basis = lagrange_basis(s, stencil)
    cells = np.arange(n)
    displacement = -(cells[:, None] + s[None, :]) * dx
    kernel_values = kernel.periodized(displacement, grid.length)
    per_cell = dx * kernel_values @ (w[:, None] * basis.T)
    weights = np.zeros(n)
    for q, offset in enumerate(stencil_offsets(stencil).astype(int)):
        np.add.at(weights, (cells + offset) % n, per_cell[:, q])
    weights.setflags(write=False)
    return weights


class OracleBackend(BaseKernelBackend):
    """Brute-force O(n²) nodal quadrature of the periodized kernel."""

    tag = KernelBackend.ORACLE

    def __init__(self, stencil: Optional[int] = None,
                 max_nodes: Optional[int] = None) -> None:
        self.stencil = check_stencil(stencil or settings.SCAN_STENCIL)
        self.max_nodes = max_nodes or settings.ORACLE_MAX_NODES

    def apply(self, values: np.ndarray, grid: Grid1D, kernel: ExpKernel) -> np.ndarray:
        self.check_grid(grid)
        if grid.n > self.max_nodes:
            raise SizeGuardError(
                f'Oracle capped at {self.max_nodes} nodes, grid has {grid.n}'
            )
        values = np.asarray(values, dtype=float)
        weights = nodal_weights(grid, kernel, self.stencil)
        out = np.zeros_like(values)
        for m in range(grid.n):
            out += weights[m] * np.roll(values, -m, axis=-1)
        return out

    def __repr__(self) -> str:
        return f'OracleBackend(stencil={self.stencil})'
