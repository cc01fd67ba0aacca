"""
Time-series checks over a whole run.

Gronwall envelopes for the L^p norms of u and w, the Young comparison
between (a, c) and (u, w), and the space-time variation that controls
compactness of the mollified family.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid

from diagnostics.records import DiagnosticsRecord
from dynamics.services.rhs_assembler import RhsAssembler, default_assembler
from dynamics.state import Trajectory
from numerics.exceptions import EmptyTrajectoryError, InvalidParameterError
from numerics.field import integrate_values

logger = logging.getLogger('diagnostics')

ENVELOPE_FIELDS = ('u', 'w')
VARIATION_COMPONENTS = ('a', 'c', 'b')


@dataclass(frozen=True)
class GrowthEnvelope:
    """Measured ‖field(t)‖_p against e^{|t - t₀|·C_T}·‖field(t₀)‖_p."""

    field: str
    p: float
    C_T: float
    times: Tuple[float, ...]
    norm_series: Tuple[float, ...]
    envelope_series: Tuple[float, ...]

    def margins(self) -> np.ndarray:
        return np.asarray(self.envelope_series) - np.asarray(self.norm_series)

    def worst_margin(self) -> float:
        return float(np.min(self.margins()))

    def holds(self, rtol: float = 1e-10) -> bool:
        env = np.asarray(self.envelope_series)
        return bool(np.all(np.asarray(self.norm_series) <= env * (1.0 + rtol) + 1e-300))


@dataclass(frozen=True)
class YoungComparison:
    """Samples where ‖a‖_p > ‖u‖_p or ‖c‖_p > ‖w‖_p beyond tolerance."""

    worst_ratio: float
    violations: List[Tuple[float, str, float]] = field(default_factory=list)

    @property
    def holds(self) -> bool:
        return not self.violations


def growth_constant(records: Sequence[DiagnosticsRecord]) -> float:
    """C_T = 3/2 · max over samples of (‖bₓ‖_∞ + ‖aₓcₓ - ac‖_∞)."""
    return 1.5 * max(r.bx_sup + r.coupling_sup for r in records)


def growth_envelope(records: Sequence[DiagnosticsRecord], field: str = 'u',
                    p: float = 1.0) -> GrowthEnvelope:
    if len(records) < 2:
        raise EmptyTrajectoryError(f'Growth envelope needs at least 2 samples, got {len(records)}')
    if field not in ENVELOPE_FIELDS:
        raise InvalidParameterError(f'Growth envelope field must be one of {ENVELOPE_FIELDS}, got {field!r}')
    c_t = growth_constant(records)
    t0 = records[0].t
    series = tuple(r.norm(field, p) for r in records)
    envelope = tuple(math.exp(abs(r.t - t0) * c_t) * series[0] for r in records)
    result = GrowthEnvelope(
        field=field,
        p=float(p),
        C_T=c_t,
        times=tuple(r.t for r in records),
        norm_series=series,
        envelope_series=envelope,
    )
    if not result.holds():
        logger.warning('Growth envelope for %s in L^%s broken, worst margin %.3e',
                       field, p, result.worst_margin())
    return result


def young_comparison(records: Sequence[DiagnosticsRecord], rtol: float = 1e-8) -> YoungComparison:
    """‖a‖_p ≤ ‖u‖_p and ‖c‖_p ≤ ‖w‖_p for every stored exponent."""
    worst = 0.0
    violations = []
    for r in records:
        for (name, p), value in r.norms.items():
            partner = {'a': 'u', 'c': 'w'}.get(name)
            if partner is None:
                continue
            bound = r.norms[(partner, p)]
            if bound > 0.0:
                worst = max(worst, value / bound)
            if value > bound * (1.0 + rtol) + 1e-300:
                violations.append((r.t, name, p))
    return YoungComparison(worst_ratio=worst, violations=violations)


def spacetime_variation(trajectory: Trajectory, component: str = 'a',
                        assembler: RhsAssembler = None) -> float:
    """
    ‖∂ₓₓf‖_{L¹} + ‖∂ₓₜf‖_{L¹} over the run's space-time box for f in
    {a, c, b}, with the trapezoid rule over the stored time slices.
    """
    if component not in VARIATION_COMPONENTS:
        raise InvalidParameterError(f'Unknown component {component!r}')
    if len(trajectory) < 2:
        raise EmptyTrajectoryError('Space-time variation needs at least 2 snapshots')
    assembler = assembler or default_assembler()
    grid = trajectory[0].state.grid

    per_slice = []
    for snap in trajectory:
        a, c, b = snap.state.a.values, snap.state.c.values, snap.b.values
        if component == 'b':
            rate, _ = assembler.rhs_values(snap.state.stacked(), grid)
            b_t = assembler.recover_b_rate(a, c, rate[0], rate[1], grid)
            fxx = assembler.dd(b, grid)
            fxt = assembler.d(b_t, grid)
        else:
            row = 0 if component == 'a' else 1
            f = a if component == 'a' else c
            fxx = assembler.dd(f, grid)
            fxt = assembler.slope_rate(a, c, b, grid)[row]
        per_slice.append(integrate_values(np.abs(fxx), grid) + integrate_values(np.abs(fxt), grid))

    times = np.array([snap.t for snap in trajectory])
    return abs(float(trapezoid(per_slice, x=times)))
