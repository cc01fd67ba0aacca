"""
Base class that every kernel backend inherits from.

Handles the checks shared by all backends so each concrete backend
only has to say how it turns samples into convolved samples.
"""
import logging
from abc import ABC, abstractmethod
from enum import Enum

import numpy as np

from numerics.exceptions import BackendError
from numerics.field import Field, Grid1D, ensure_finite
from numerics.kernels.exp_kernel import ExpKernel

logger = logging.getLogger('numerics')


class KernelBackend(str, Enum):
    """Strategy tags for Helmholtz-inverse convolutions."""

    FOURIER = 'fourier'
    SCAN = 'scan'
    ORACLE = 'oracle'

    @classmethod
    def parse(cls, tag) -> 'KernelBackend':
        """Accept short tags and the long descriptive names."""
        if isinstance(tag, cls):
            return tag
        aliases = {
            'fourier-symbol': cls.FOURIER,
            'recursive-scan': cls.SCAN,
            'direct-quadrature-oracle': cls.ORACLE,
        }
        text = str(tag).strip().lower()
        if text in aliases:
            return aliases[text]
        try:
            return cls(text)
        except ValueError:
            raise BackendError(f'Unknown kernel backend: {tag}') from None


class BaseKernelBackend(ABC):
    """
    Common plumbing for the convolution backends.
    Subclasses implement apply() on raw arrays; stacked inputs
    (shape (m, n)) are convolved row by row in one call.
    """

    tag: KernelBackend

    @abstractmethod
    def apply(self, values: np.ndarray, grid: Grid1D, kernel: ExpKernel) -> np.ndarray:
        """Convolve samples (last axis is space) with the periodized kernel."""

    def check_grid(self, grid: Grid1D) -> None:
        if not grid.periodic:
            raise BackendError(f'{self.tag.value} backend needs a periodic grid')

    def convolve(self, f: Field, kernel: ExpKernel) -> Field:
        ensure_finite(f, 'convolution input')
        self.check_grid(f.grid)
        return Field(f.grid, self.apply(f.values, f.grid, kernel))

    def __repr__(self) -> str:
        return f'{type(self).__name__}()'
