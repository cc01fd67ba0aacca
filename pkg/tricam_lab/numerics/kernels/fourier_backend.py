"""
Fourier-symbol backend.

Multiplies each rfft mode by 2αA/(α²+k²) (times ik for the
differentiated kernel). Exact inverse of the spectral Helmholtz
operator up to roundoff.
"""
from functools import lru_cache

import numpy as np

from numerics.field import Grid1D, spectral_apply
from numerics.kernels.base_backend import BaseKernelBackend, KernelBackend
from numerics.kernels.exp_kernel import ExpKernel


@lru_cache(maxsize=64)
def _symbol(grid: Grid1D, kernel: ExpKernel) -> np.ndarray:
    symbol = kernel.symbol(grid.wavenumbers)
    if kernel.differentiated:
        symbol = symbol * grid.odd_mask
    symbol.setflags(write=False)
    return symbol


class FourierBackend(BaseKernelBackend):
    """O(n log n) convolution through the kernel's Fourier multiplier."""

    tag = KernelBackend.FOURIER

    def apply(self, values: np.ndarray, grid: Grid1D, kernel: ExpKernel) -> np.ndarray:
        self.check_grid(grid)
        return spectral_apply(values, grid, _symbol(grid, kernel))
