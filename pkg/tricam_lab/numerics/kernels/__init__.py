"""
Helmholtz-inverse convolutions.

G₁∗ = (1-∂ₓₓ)^{-1} and G₂∗ = (4-∂ₓₓ)^{-1} plus their x-derivatives,
each available through the fourier, scan and oracle backends.
"""
from typing import Optional, Union

import numpy as np

from config import settings
from numerics.field import Field, Grid1D
from numerics.kernels.base_backend import BaseKernelBackend, KernelBackend
from numerics.kernels.exp_kernel import G1, G2, ExpKernel
from numerics.kernels.fourier_backend import FourierBackend
from numerics.kernels.oracle_backend import OracleBackend
from numerics.kernels.scan_backend import ScanBackend

BackendLike = Union[None, str, KernelBackend, BaseKernelBackend]

G1_DX = G1.differentiate()
G2_DX = G2.differentiate()

_BACKEND_CLASSES = {
    KernelBackend.FOURIER: FourierBackend,
    KernelBackend.SCAN: ScanBackend,
    KernelBackend.ORACLE: OracleBackend,
}
_instances = {}


def get_backend(backend: BackendLike = None) -> BaseKernelBackend:
    """Pick the backend object for a tag (or pass an instance straight through)."""
    if isinstance(backend, BaseKernelBackend):
        return backend
    tag = KernelBackend.parse(backend or settings.DEFAULT_BACKEND)
    if tag not in _instances:
        _instances[tag] = _BACKEND_CLASSES[tag]()
    return _instances[tag]


def apply_kernel(values: np.ndarray, grid: Grid1D, kernel: ExpKernel,
                 backend: BackendLike = None) -> np.ndarray:
    """Array-level entry point used by the solver's inner loop."""
    return get_backend(backend).apply(values, grid, kernel)


def conv_g1(f: Field, backend: BackendLike = None) -> Field:
    return get_backend(backend).convolve(f, G1)


def conv_g2(f: Field, backend: BackendLike = None) -> Field:
    return get_backend(backend).convolve(f, G2)


def conv_g1_dx(f: Field, backend: BackendLike = None) -> Field:
    return get_backend(backend).convolve(f, G1_DX)


def conv_g2_dx(f: Field, backend: BackendLike = None) -> Field:
    return get_backend(backend).convolve(f, G2_DX)


def recursive_exp_conv(f: Field, kernel: ExpKernel, stencil: Optional[int] = None) -> Field:
    """O(n) convolution with any exponential kernel."""
    return ScanBackend(stencil).convolve(f, kernel)


def direct_conv_oracle(f: Field, kernel: ExpKernel, stencil: Optional[int] = None) -> Field:
    """O(n²) reference convolution; raises SizeGuardError above the node cap."""
    return OracleBackend(stencil).convolve(f, kernel)


def periodized_kernel(kernel: ExpKernel, grid: Grid1D, x: np.ndarray) -> np.ndarray:
    """Kernel summed over all images of the grid period, sampled at x."""
    return kernel.periodized(x, grid.length)


__all__ = [
    'G1', 'G2', 'G1_DX', 'G2_DX', 'ExpKernel', 'KernelBackend', 'BaseKernelBackend',
    'FourierBackend', 'ScanBackend', 'OracleBackend', 'get_backend', 'apply_kernel',
    'conv_g1', 'conv_g2', 'conv_g1_dx', 'conv_g2_dx',
    'recursive_exp_conv', 'direct_conv_oracle', 'periodized_kernel',
]
