"""
Weak-form residuals of a stored trajectory.

A test function φ(t, x) = ρ((t - t_c)/τ)·ρ((x - x_c)/ξ) is integrated
against the stored slices. For a trajectory started at t₀ and stored up
to T the residual of the a equation is

    R_a = ∫∫ (aφ_t + aₓbφ - ½G₁∗f₁·φₓ + ½G₁∗g₁·φ) dx dt + ∫a(t₀)φ(t₀, ·) dx

and R_c is the same with (c, f₂, g₂). Space is integrated with the
grid quadrature, time with the trapezoid rule over the slices.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from dynamics.services.rhs_assembler import RhsAssembler, default_assembler
from dynamics.state import Snapshot, Trajectory
from initdata.services.mollifier import bump, check_support
from numerics.exceptions import EmptyTrajectoryError, UnsupportedTestFunctionError
from numerics.field import Grid1D, integrate_values
from numerics.kernels import G1

logger = logging.getLogger('diagnostics')


def _inside(s: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    s = np.asarray(s, dtype=float)
    return s, np.abs(s) < 1.0


def bump_d1(s: np.ndarray) -> np.ndarray:
    """ρ'(s) = -2s/(s² - 1)²·ρ(s)."""
    s, inside = _inside(s)
    out = np.zeros_like(s)
    q = s[inside] ** 2 - 1.0
    out[inside] = -2.0 * s[inside] / q ** 2 * np.exp(1.0 / q)
    return out


def bump_d2(s: np.ndarray) -> np.ndarray:
    """ρ''(s) = (6s⁴ - 2)/(s² - 1)⁴·ρ(s)."""
    s, inside = _inside(s)
    out = np.zeros_like(s)
    q = s[inside] ** 2 - 1.0
    out[inside] = (6.0 * s[inside] ** 4 - 2.0) / q ** 4 * np.exp(1.0 / q)
    return out


@dataclass(frozen=True)
class BumpTestFunction:
    """Tensor product of rescaled bumps in t and x."""

    t_centre: float
    t_half_width: float
    x_centre: float
    x_half_width: float

    def __post_init__(self) -> None:
        if self.t_half_width <= 0 or self.x_half_width <= 0:
            raise UnsupportedTestFunctionError('Test function half widths must be positive')

    @classmethod
    def random(cls, rng: np.random.Generator, t0: float, t_end: float, grid: Grid1D,
               straddle: bool = False) -> 'BumpTestFunction':
        """
        Random bump inside the box of a run on [t0, t_end].
        straddle=True centres it on t0 so the initial-data term is active.
        """
        span = t_end - t0
        if straddle:
            t_centre = t0
            t_half = span * rng.uniform(0.5, 0.9)
        else:
            t_centre = t0 + span * rng.uniform(0.45, 0.55)
            t_half = span * rng.uniform(0.3, 0.45)
        x_centre = grid.x_min + grid.length * rng.uniform(0.35, 0.65)
        x_half = grid.length * rng.uniform(0.05, 0.15)
        return cls(t_centre, t_half, x_centre, x_half)

    def check_support(self, t0: float, t_end: float, grid: Grid1D) -> None:
        """Support must sit inside (t0 - (T - t0), T) × (x_min, x_max)."""
        if t_end <= t0:
            raise UnsupportedTestFunctionError('Weak residual needs a trajectory running forward in time')
        t_lo = t0 - (t_end - t0)
        if self.t_centre - self.t_half_width < t_lo or self.t_centre + self.t_half_width > t_end:
            raise UnsupportedTestFunctionError(
                f'Time support [{self.t_centre - self.t_half_width:.6g}, '
                f'{self.t_centre + self.t_half_width:.6g}] leaves ({t_lo:.6g}, {t_end:.6g})'
            )
        if (self.x_centre - self.x_half_width < grid.x_min
                or self.x_centre + self.x_half_width > grid.x_max):
            raise UnsupportedTestFunctionError(
                f'Space support around {self.x_centre:.6g} leaves ({grid.x_min}, {grid.x_max})'
            )
        check_support(2.0 * self.x_half_width, grid, 'test function')

    def _s(self, t: float) -> float:
        return (t - self.t_centre) / self.t_half_width

    def _y(self, x: np.ndarray) -> np.ndarray:
        return (x - self.x_centre) / self.x_half_width

    def time_factor(self, t: float) -> float:
        return float(bump(np.array([self._s(t)]))[0])

    def time_factor_dt(self, t: float) -> float:
        return float(bump_d1(np.array([self._s(t)]))[0]) / self.t_half_width

    def space(self, x: np.ndarray) -> np.ndarray:
        return bump(self._y(x))

    def space_dx(self, x: np.ndarray) -> np.ndarray:
        return bump_d1(self._y(x)) / self.x_half_width

    def space_dxx(self, x: np.ndarray) -> np.ndarray:
        return bump_d2(self._y(x)) / self.x_half_width ** 2


def weak_residual(trajectory: Trajectory, test: BumpTestFunction,
                  assembler: Optional[RhsAssembler] = None) -> Tuple[float, float]:
    """(R_a, R_c) for one test function."""
    if len(trajectory) < 2:
        raise EmptyTrajectoryError('Weak residual needs at least 2 snapshots')
    assembler = assembler or default_assembler()
    grid = trajectory[0].state.grid
    times = np.array([snap.t for snap in trajectory])
    t0, t_end = times[0], times[-1]
    test.check_support(t0, t_end, grid)

    psi = test.space(grid.x)
    psi_x = test.space_dx(grid.x)

    integrands = np.zeros((2, len(trajectory)))
    for i, snap in enumerate(trajectory):
        phi_t_factor = test.time_factor(snap.t)
        dphi_t_factor = test.time_factor_dt(snap.t)
        if phi_t_factor == 0.0 and dphi_t_factor == 0.0:
            continue
        values = snap.state.stacked()
        b = snap.b.values
        first = assembler.d(values, grid)
        f1, g1, f2, g2 = assembler.forces(values[0], values[1], b, grid, first[0], first[1])
        conv_f = assembler.conv(np.vstack([f1, f2]), grid, G1)
        conv_g = assembler.conv(np.vstack([g1, g2]), grid, G1)
        density = (values * (dphi_t_factor * psi)
                   + phi_t_factor * (first * b * psi - 0.5 * conv_f * psi_x + 0.5 * conv_g * psi))
        integrands[0, i] = integrate_values(density[0], grid)
        integrands[1, i] = integrate_values(density[1], grid)

    phi0 = test.time_factor(t0) * psi
    first_state = trajectory[0].state
    r_a = float(trapezoid(integrands[0], x=times)) + integrate_values(first_state.a.values * phi0, grid)
    r_c = float(trapezoid(integrands[1], x=times)) + integrate_values(first_state.c.values * phi0, grid)
    logger.debug('weak residual R_a=%.3e R_c=%.3e over %d slices', r_a, r_c, len(trajectory))
    return r_a, r_c


def weak_elliptic_residual(snapshot: Snapshot, test: BumpTestFunction,
                           assembler: Optional[RhsAssembler] = None) -> float:
    """∫(4bψ - bψ_xx) - ∫source·ψ for the spatial factor ψ of the test function."""
    assembler = assembler or default_assembler()
    state = snapshot.state
    grid = state.grid
    psi = test.space(grid.x)
    psi_xx = test.space_dxx(grid.x)
    source = assembler.elliptic_source(state.a.values, state.c.values, grid)
    b = snapshot.b.values
    return integrate_values(4.0 * b * psi - b * psi_xx - source * psi, grid)
