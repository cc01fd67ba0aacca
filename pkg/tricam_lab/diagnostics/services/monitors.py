"""
Invariant monitor service.

Measures the conserved quantities, the sign and slope conditions and
the bounds on b for a single state, and packs them into a
DiagnosticsRecord. Everything here is a pure measurement: inadmissible
data gives bad numbers, never an exception.
"""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from config import settings
from diagnostics.records import NORM_FIELDS, DiagnosticsRecord, norm_exponents
from dynamics.services.rhs_assembler import RhsAssembler, default_assembler
from dynamics.state import Snapshot, State
from numerics.field import Field, Grid1D, h1_norm, integrate_values, lp_norm
from numerics.kernels import G2, BackendLike, apply_kernel

logger = logging.getLogger('diagnostics')


@dataclass(frozen=True)
class SignSlope:
    min_u: float
    min_w: float
    slope_excess_a: float
    slope_excess_c: float


@dataclass(frozen=True)
class BBounds:
    b_h1: float
    b_sup: float
    bx_sup: float
    elliptic_residual: float
    source_sup: float
    source_l1: float


@dataclass(frozen=True)
class CascadeBounds:
    """Initial conserved quantities against their a-priori bounds."""

    h1: float
    h1_bound: float
    h2: float
    h2_bound: float

    def holds(self, rtol: float = 1e-12) -> bool:
        return (abs(self.h1) <= self.h1_bound * (1.0 + rtol) + 1e-300
                and abs(self.h2) <= self.h2_bound * (1.0 + rtol) + 1e-300)


def total_variation(f: Field) -> float:
    """Sum of absolute increments between neighbouring nodes, wrapping on periodic grids."""
    values = f.values
    if f.grid.periodic:
        values = np.append(values, values[0])
    return float(np.sum(np.abs(np.diff(values))))


def young_constant(grid: Grid1D, backend: BackendLike = None) -> float:
    """
    ‖G₂‖_{H¹} read off the discrete impulse response, so that
    ‖b‖_{H¹} ≤ young_constant·‖source‖_{L¹} holds for the discrete operator.
    The continuous value is √(5/32).
    """
    impulse = np.zeros(grid.n)
    impulse[grid.n // 2] = 1.0 / grid.dx
    response = apply_kernel(impulse, grid, G2, backend)
    return h1_norm(Field(grid, response))


def b_sup_bound(h1_0: float, h2_0: float, t: float) -> float:
    """H₁(0) + H₂(0)/4 + exp((8H₁(0) + 2H₂(0))t), the explicit bound on ‖b‖_∞ and ‖bₓ‖_∞."""
    return h1_0 + 0.25 * h2_0 + math.exp((8.0 * h1_0 + 2.0 * h2_0) * t)


class InvariantMonitor:
    """
    Measures one state at a time.
    Derivatives and convolutions come from the assembler so the
    diagnostics see exactly the operators the solver used.
    """

    def __init__(self, assembler: Optional[RhsAssembler] = None,
                 epsilon: Optional[float] = None) -> None:
        self.assembler = assembler or default_assembler()
        self.epsilon = settings.DEFAULT_EPSILON if epsilon is None else float(epsilon)
        self.exponents = norm_exponents(self.epsilon)

    def _derivatives(self, s: State) -> Tuple[np.ndarray, np.ndarray]:
        values = s.stacked()
        return self.assembler.d(values, s.grid), self.assembler.dd(values, s.grid)

    def momenta(self, s: State) -> Tuple[np.ndarray, np.ndarray]:
        """(u, w) = (a - a_xx, c - c_xx) as raw arrays."""
        _, second = self._derivatives(s)
        u, w = s.stacked() - second
        return u, w

    def conserved_h1(self, s: State) -> float:
        first, _ = self._derivatives(s)
        a, c = s.a.values, s.c.values
        return integrate_values(a * c + first[0] * first[1], s.grid)

    def conserved_h2(self, s: State) -> Tuple[float, float]:
        """Both forms ∫u·cₓ and -∫w·aₓ."""
        first, second = self._derivatives(s)
        u = s.a.values - second[0]
        w = s.c.values - second[1]
        return (integrate_values(u * first[1], s.grid),
                -integrate_values(w * first[0], s.grid))

    def sign_and_slope(self, s: State) -> SignSlope:
        first, second = self._derivatives(s)
        u, w = s.stacked() - second
        return SignSlope(
            min_u=float(np.min(u)),
            min_w=float(np.min(w)),
            slope_excess_a=float(np.max(np.abs(first[0]) - s.a.values)),
            slope_excess_c=float(np.max(np.abs(first[1]) - s.c.values)),
        )

    def b_bounds(self, s: State, b: Optional[Field] = None) -> BBounds:
        grid = s.grid
        source = self.assembler.elliptic_source(s.a.values, s.c.values, grid)
        if b is None:
            b_values = self.assembler.conv(source, grid, G2)
        else:
            b_values = b.values
        bx = self.assembler.d(b_values, grid)
        bxx = self.assembler.dd(b_values, grid)
        return BBounds(
            b_h1=math.sqrt(integrate_values(b_values ** 2 + bx ** 2, grid)),
            b_sup=float(np.max(np.abs(b_values))),
            bx_sup=float(np.max(np.abs(bx))),
            elliptic_residual=float(np.max(np.abs(4.0 * b_values - bxx - source))),
            source_sup=float(np.max(np.abs(source))),
            source_l1=integrate_values(np.abs(source), grid),
        )

    def norm_map(self, s: State, b: np.ndarray, u: np.ndarray,
                 w: np.ndarray) -> Dict[Tuple[str, float], float]:
        arrays = {'a': s.a.values, 'c': s.c.values, 'b': b, 'u': u, 'w': w}
        grid = s.grid
        return {
            (name, p): lp_norm(Field(grid, arrays[name]), p)
            for name in NORM_FIELDS
            for p in self.exponents
        }

    def cascade_initial_bounds(self, s: State) -> CascadeBounds:
        u, _ = self.momenta(s)
        h2, _ = self.conserved_h2(s)
        d = self.assembler.derivative_backend
        return CascadeBounds(
            h1=self.conserved_h1(s),
            h1_bound=h1_norm(s.a, d) * h1_norm(s.c, d),
            h2=h2,
            h2_bound=integrate_values(np.abs(u), s.grid) * s.c.sup(),
        )

    def record(self, s: State, b: Optional[Field] = None) -> DiagnosticsRecord:
        """Every monitored quantity of one state."""
        grid = s.grid
        if b is None:
            b = Field(grid, self.assembler.recover_b(s.a.values, s.c.values, grid))
        first, second = self._derivatives(s)
        u, w = s.stacked() - second
        ax, cx = first
        h2_form1, h2_form2 = self.conserved_h2(s)
        signs = self.sign_and_slope(s)
        bounds = self.b_bounds(s, b)
        norms = self.norm_map(s, b.values, u, w)
        bx = self.assembler.d(b.values, grid)

        rate, _ = self.assembler.rhs_values(s.stacked(), grid)
        b_rate = self.assembler.recover_b_rate(s.a.values, s.c.values, rate[0], rate[1], grid)

        p = 1.0 + self.epsilon
        return DiagnosticsRecord(
            t=s.t,
            H1=self.conserved_h1(s),
            H2_form1=h2_form1,
            H2_form2=h2_form2,
            min_u=signs.min_u,
            min_w=signs.min_w,
            slope_excess_a=signs.slope_excess_a,
            slope_excess_c=signs.slope_excess_c,
            l1_u=norms[('u', 1.0)],
            l1_w=norms[('w', 1.0)],
            lp_u=norms[('u', p)],
            lp_w=norms[('w', p)],
            l2_a=norms[('a', 2.0)],
            l2_c=norms[('c', 2.0)],
            sup_a=norms[('a', math.inf)],
            sup_c=norms[('c', math.inf)],
            b_h1=bounds.b_h1,
            b_sup=bounds.b_sup,
            bx_sup=bounds.bx_sup,
            elliptic_residual=bounds.elliptic_residual,
            tv_ax=total_variation(Field(grid, ax)),
            tv_bx=total_variation(Field(grid, bx)),
            epsilon=self.epsilon,
            norms=norms,
            l1_a=integrate_values(s.a.values, grid),
            l1_c=integrate_values(s.c.values, grid),
            coupling_sup=float(np.max(np.abs(ax * cx - s.a.values * s.c.values))),
            b_rate_sup=float(np.max(np.abs(b_rate))),
            source_sup=bounds.source_sup,
        )


def conserved_h1(s: State, monitor: Optional[InvariantMonitor] = None) -> float:
    """H₁ = ∫(ac + aₓcₓ)."""
    return (monitor or InvariantMonitor()).conserved_h1(s)


def conserved_h2(s: State, monitor: Optional[InvariantMonitor] = None) -> Tuple[float, float]:
    """H₂ in both forms, (∫u·cₓ, -∫w·aₓ)."""
    return (monitor or InvariantMonitor()).conserved_h2(s)


def sign_and_slope_check(s: State, monitor: Optional[InvariantMonitor] = None) -> SignSlope:
    return (monitor or InvariantMonitor()).sign_and_slope(s)


def b_bounds(s: State, monitor: Optional[InvariantMonitor] = None) -> BBounds:
    return (monitor or InvariantMonitor()).b_bounds(s)


def cascade_initial_bounds(s: State, monitor: Optional[InvariantMonitor] = None) -> CascadeBounds:
    return (monitor or InvariantMonitor()).cascade_initial_bounds(s)


def build_record(snapshot: Snapshot, monitor: Optional[InvariantMonitor] = None) -> DiagnosticsRecord:
    record = (monitor or InvariantMonitor()).record(snapshot.state, snapshot.b)
    if not record.is_finite():
        logger.warning('Non-finite diagnostics at t=%.6f', record.t)
    return record
