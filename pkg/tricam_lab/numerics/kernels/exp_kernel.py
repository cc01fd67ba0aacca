"""
Exponential Green's kernels of the Helmholtz inverses.

A·e^{-α|x|} with A = 1/(2α) inverts (α² - ∂ₓₓ); the differentiated
flavour is the x-derivative of that convolution. Both are also
available summed over all periodic images in closed form.
"""
from dataclasses import dataclass, replace

import numpy as np


@dataclass(frozen=True)
class ExpKernel:
    """A·e^{-α|x|}, or its x-derivative when differentiated is set."""

    decay: float
    amplitude: float
    differentiated: bool = False

    def __post_init__(self) -> None:
        if self.decay <= 0:
            raise ValueError(f'Kernel decay must be positive, got {self.decay}')

    @classmethod
    def helmholtz(cls, decay: float) -> 'ExpKernel':
        """Kernel of (decay² - ∂ₓₓ)^{-1}."""
        return cls(decay=float(decay), amplitude=1.0 / (2.0 * decay))

    def differentiate(self) -> 'ExpKernel':
        return replace(self, differentiated=True)

    @property
    def mass(self) -> float:
        """Integral of the undifferentiated kernel, 2A/α."""
        return 2.0 * self.amplitude / self.decay

    def symbol(self, k: np.ndarray) -> np.ndarray:
        """Fourier multiplier: 2αA/(α²+k²), times ik when differentiated."""
        alpha = self.decay
        base = 2.0 * alpha * self.amplitude / (alpha ** 2 + k ** 2)
        if self.differentiated:
            return 1j * k * base
        return base.astype(complex)

    def free_space(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        decayed = self.amplitude * np.exp(-self.decay * np.abs(d))
        if self.differentiated:
            return -self.decay * np.sign(d) * decayed
        return decayed

    def periodized(self, d: np.ndarray, period: float) -> np.ndarray:
        """
        Sum over all images d + j·period, in closed form.
        Equivalent to A·cosh(α(P/2-|d|))/sinh(αP/2) for |d| <= P/2,
        written with decaying exponentials so long periods do not overflow.
        """
        d = np.asarray(d, dtype=float)
        d = (d + 0.5 * period) % period - 0.5 * period
        r = np.abs(d)
        alpha = self.decay
        near = np.exp(-alpha * r)
        far = np.exp(-alpha * (period - r))
        scale = self.amplitude / (1.0 - np.exp(-alpha * period))
        if self.differentiated:
            return -alpha * np.sign(d) * scale * (near - far)
        return scale * (near + far)


G1 = ExpKernel.helmholtz(1.0)
G2 = ExpKernel.helmholtz(2.0)
