"""
Classical RK4 in time for the (a, c) system.

A step chosen by the integrator is the smallest of four limits:

    transport   cfl·dx / ‖b‖∞
    reaction    cfl / (‖bₓ‖∞ + 3M(M + U)), M = sup |a, c, aₓ, cₓ|, U = sup |u, w|
    max_dt      absolute cap from settings
    span        |t_end - t0| / min_steps

Steps may be negative, so the same code integrates backward in time.
"""
import logging
import math
from typing import Callable, Optional

import numpy as np

from config import settings
from numerics.exceptions import BlowUpError, CflViolationError
from numerics.field import Field
from dynamics.services.rhs_assembler import RhsAssembler
from dynamics.state import Snapshot, State, Trajectory

logger = logging.getLogger('solver')

Observer = Callable[[State, Field], None]

# relative slack when deciding that a step already lands on t_end
_LANDING_TOL = 1e-12


class TrajectoryRecorder:
    """Observer that keeps every observed (state, b) pair."""

    def __init__(self) -> None:
        self.snapshots: Trajectory = []

    def __call__(self, state: State, b: Field) -> None:
        self.snapshots.append(Snapshot(state, b))

    def __len__(self) -> int:
        return len(self.snapshots)


class TimeIntegrator:
    """
    RK4 driver for one RhsAssembler.
    cfl, strict_cfl, blowup_cap, max_dt and min_steps default to the
    values in settings.
    """

    def __init__(self, assembler: Optional[RhsAssembler] = None, cfl: Optional[float] = None,
                 strict_cfl: Optional[bool] = None, blowup_cap: Optional[float] = None,
                 max_dt: Optional[float] = None, min_steps: Optional[int] = None) -> None:
        self.assembler = assembler or RhsAssembler()
        self.cfl = settings.DEFAULT_CFL if cfl is None else float(cfl)
        self.strict_cfl = settings.STRICT_CFL if strict_cfl is None else bool(strict_cfl)
        self.blowup_cap = settings.BLOWUP_CAP if blowup_cap is None else float(blowup_cap)
        self.max_dt = settings.MAX_DT if max_dt is None else float(max_dt)
        self.min_steps = settings.MIN_STEPS if min_steps is None else int(min_steps)
        if not (math.isfinite(self.max_dt) and self.max_dt > 0):
            raise ValueError(f'max_dt must be finite and > 0, got {self.max_dt}')
        if self.min_steps < 1:
            raise ValueError(f'min_steps must be >= 1, got {self.min_steps}')
        self.steps_taken = 0

    def cfl_limit(self, b_sup: float, dx: float) -> float:
        return self.cfl * dx / max(1e-12, b_sup)

    def reaction_rate(self, s: State, b: Field) -> float:
        """Bound on how fast the cubic forcing and the b coupling can grow a perturbation."""
        y = s.stacked()
        first = self.assembler.d(y, s.grid)
        second = self.assembler.dd(y, s.grid)
        m = max(float(np.max(np.abs(y))), float(np.max(np.abs(first))))
        u = float(np.max(np.abs(y - second)))
        bx = float(np.max(np.abs(self.assembler.d(b.values, s.grid))))
        return bx + 3.0 * m * (m + u)

    def reaction_limit(self, s: State, b: Field) -> float:
        return self.cfl / max(1e-12, self.reaction_rate(s, b))

    def auto_dt(self, s: State, span: float) -> float:
        """Step the integrator picks at s for a run covering `span` in total."""
        b = self.recover_b(s)
        return min(
            self.cfl_limit(b.sup(), s.grid.dx),
            self.reaction_limit(s, b),
            self.max_dt,
            abs(span) / self.min_steps,
        )

    def recover_b(self, s: State) -> Field:
        return Field(s.grid, self.assembler.recover_b(s.a.values, s.c.values, s.grid))

    def _check_cfl(self, dt: float, b: np.ndarray, s: State) -> None:
        limit = self.cfl_limit(float(np.max(np.abs(b))), s.grid.dx)
        if abs(dt) <= limit * (1.0 + _LANDING_TOL):
            return
        message = f'|dt|={abs(dt):.3e} exceeds CFL limit {limit:.3e} at t={s.t:.6f}'
        if self.strict_cfl:
            raise CflViolationError(message)
        logger.warning(message)

    def _check_health(self, values: np.ndarray, t: float) -> None:
        finite = np.all(np.isfinite(values))
        sups = {'a': float(np.max(np.abs(values[0]))), 'c': float(np.max(np.abs(values[1])))}
        if finite and max(sups.values()) <= self.blowup_cap:
            return
        reason = 'non-finite values' if not finite else f'sup norm above cap {self.blowup_cap:.3e}'
        error = BlowUpError(reason, t=t, step=self.steps_taken, sup_norms=sups)
        logger.error(error.report())
        raise error

    def step(self, s: State, dt: float) -> State:
        """One RK4 step of size dt (either sign)."""
        if dt == 0 or not math.isfinite(dt):
            raise ValueError(f'dt must be finite and non-zero, got {dt}')
        grid = s.grid
        rate = self.assembler.rhs_values
        y = s.stacked()

        k1, b = rate(y, grid)
        self._check_cfl(dt, b, s)
        k2, _ = rate(y + 0.5 * dt * k1, grid)
        k3, _ = rate(y + 0.5 * dt * k2, grid)
        k4, _ = rate(y + dt * k3, grid)
        y_next = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

        self.steps_taken += 1
        self._check_health(y_next, s.t + dt)
        return State.from_stacked(s.t + dt, y_next, grid)

    def _next_dt(self, s: State, dt: Optional[float], remaining: float, span: float) -> float:
        h = self.auto_dt(s, span) if dt is None else abs(dt)
        return min(h, abs(remaining))

    def evolve(self, s0: State, t_end: float, dt: Optional[float] = None,
               observer: Optional[Observer] = None, stride: Optional[int] = None) -> State:
        """
        Step from s0.t to exactly t_end (forward or backward).

        dt=None picks every step with auto_dt; a given dt is used as is
        and the last step is shortened to land on t_end. The observer
        sees the initial state, every stride-th step and the final state.
        """
        stride = settings.DEFAULT_STRIDE if stride is None else int(stride)
        if stride < 1:
            raise ValueError(f'stride must be >= 1, got {stride}')
        if dt is not None and (dt == 0 or not math.isfinite(dt)):
            raise ValueError(f'dt must be finite and non-zero, got {dt}')

        self.steps_taken = 0
        s = s0
        if observer:
            observer(s, self.recover_b(s))
        span = t_end - s0.t
        direction = 1.0 if span >= 0 else -1.0
        tol = _LANDING_TOL * max(1.0, abs(t_end))
        last_observed = 0

        while abs(t_end - s.t) > tol:
            remaining = t_end - s.t
            h = self._next_dt(s, dt, remaining, span)
            landing = abs(remaining) - h <= tol
            s = self.step(s, direction * h)
            if landing:
                s = State(t_end, s.a, s.c)
            if observer and self.steps_taken % stride == 0:
                observer(s, self.recover_b(s))
                last_observed = self.steps_taken

        if observer and last_observed != self.steps_taken:
            observer(s, self.recover_b(s))
        logger.info('Evolved to t=%.6f in %d steps', s.t, self.steps_taken)
        return s


def step_rk4(s: State, dt: float, integrator: Optional[TimeIntegrator] = None) -> State:
    return (integrator or TimeIntegrator()).step(s, dt)


def evolve(s0: State, t_end: float, dt: Optional[float] = None,
           observer: Optional[Observer] = None, stride: Optional[int] = None,
           integrator: Optional[TimeIntegrator] = None) -> State:
    return (integrator or TimeIntegrator()).evolve(s0, t_end, dt, observer, stride)
