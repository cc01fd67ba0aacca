"""
Convergence studies.

Runs a base configuration at every value of one sweep axis, compares
the terminal fields of each point with the finest point, estimates
convergence orders and turns the invariant checks of every point into
pass/fail verdicts. Points run one after another unless the study asks
for a process pool.

Artifacts in the study directory:

    point_XX/         one run directory per sweep value
    summary.csv       one row per sweep value
    verdicts.json     every verdict with its measured value and tolerance
"""
import csv
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np
from scipy.signal import resample

from config import settings
from diagnostics.records import format_value
from diagnostics.services.envelopes import growth_envelope, young_comparison
from initdata.services.peakons import PeakonParams, peakon_mollification_error
from runs.run_config import StudyConfig
from runs.services.run_manager import EXIT_ASSERTION, EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, relative_drift
from runs.tasks import PointOutcome, run_study_point

logger = logging.getLogger('runs')

SUMMARY_FILE = 'summary.csv'
VERDICTS_FILE = 'verdicts.json'
SUMMARY_COLUMNS = (
    'index', 'value', 'status', 'final_t', 'terminal_error', 'order',
    'initial_error', 'tv_initial', 'tv_max', 'envelope_margin',
    'h1_drift', 'h2_drift', 'h2_gap',
)

TEMPORAL_ORDER = 4.0
TEMPORAL_ORDER_TOL = 0.3
# terminal errors below this count as converged for the grid sweep
ERROR_FLOOR = 1e-9


@dataclass
class PointSummary:
    index: int
    value: float
    status: str
    final_t: Optional[float] = None
    terminal_error: Optional[float] = None
    order: Optional[float] = None
    initial_error: Optional[float] = None
    tv_initial: Optional[float] = None
    tv_max: Optional[float] = None
    envelope_margin: Optional[float] = None
    h1_drift: Optional[float] = None
    h2_drift: Optional[float] = None
    h2_gap: Optional[float] = None

    def to_row(self) -> List[str]:
        row = []
        for name in SUMMARY_COLUMNS:
            value = getattr(self, name)
            if value is None:
                row.append('')
            elif isinstance(value, float):
                row.append(format_value(value))
            else:
                row.append(str(value))
        return row


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    measured: float
    tolerance: float
    detail: str = ''


@dataclass
class StudyReport:
    axis: str
    points: List[PointSummary] = field(default_factory=list)
    verdicts: List[Verdict] = field(default_factory=list)
    exit_code: int = EXIT_OK

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)

    def failed(self) -> List[Verdict]:
        return [v for v in self.verdicts if not v.passed]


def estimate_order(values: Sequence[float], errors: Sequence[Optional[float]],
                   finest: int) -> List[Optional[float]]:
    """
    Observed order between neighbouring non-finest points,
    log(e_far / e_near) / log(h_far / h_near), reported on the point further
    from the finest one. Resolution-like axes use h = 1/value.
    """
    orders: List[Optional[float]] = [None] * len(values)
    step = (lambda v: v) if finest == 0 else (lambda v: 1.0 / v)
    indices = [i for i in range(len(values)) if i != finest]
    if finest != 0:
        indices = indices[::-1]
    for near, far in zip(indices, indices[1:]):
        e_near, e_far = errors[near], errors[far]
        if not e_near or not e_far:
            continue
        orders[far] = math.log(e_far / e_near) / math.log(step(values[far]) / step(values[near]))
    return orders


def terminal_error(outcome: PointOutcome, reference: PointOutcome) -> Optional[float]:
    """Sup-norm distance of (a, c) at the final time, on the reference grid."""
    if outcome.final_a is None or reference.final_a is None:
        return None
    if not math.isclose(outcome.final_t, reference.final_t, rel_tol=1e-12, abs_tol=1e-12):
        return None
    n_ref = len(reference.final_a)
    a, c = outcome.final_a, outcome.final_c
    if len(a) != n_ref:
        # band-limited periodic samples, so Fourier resampling is exact interpolation
        a, c = resample(a, n_ref), resample(c, n_ref)
    return float(max(np.max(np.abs(a - reference.final_a)), np.max(np.abs(c - reference.final_c))))


def initial_error(outcome: PointOutcome) -> Optional[float]:
    """‖a₀ⁿ - a₀‖_{H¹} of the peakon ansatz; only defined for smoothed-peakon data."""
    config = outcome.config
    if config.profile != 'smoothed-peakon':
        return None
    params = config.profile_params()
    left, right = params.pair_positions()
    peaks = PeakonParams.of([(params.amplitude, left), (params.amplitude, right)], 'a')
    return peakon_mollification_error(peaks, config.moll_n, config.grid())


def envelope_exponents(epsilon: float) -> List[float]:
    return sorted({1.0, 1.0 + float(epsilon), 2.0})


def _max(values) -> float:
    values = list(values)
    return max(values) if values else 0.0


class StudyRunner:
    """Executes a StudyConfig and judges the outcome."""

    def __init__(self, study: StudyConfig) -> None:
        self.study = study
        self.out_dir = Path(study.base.out)

    def run_points(self) -> List[PointOutcome]:
        study = self.study
        jobs = [(i, v, study.point_config(i)) for i, v in enumerate(study.values)]
        if study.parallel:
            logger.info('Running %d sweep points on %d workers', len(jobs), study.workers)
            with ProcessPoolExecutor(max_workers=study.workers) as pool:
                futures = [pool.submit(run_study_point, *job) for job in jobs]
                return [f.result() for f in futures]
        return [run_study_point(*job) for job in jobs]

    def summarize(self, outcomes: Sequence[PointOutcome]) -> List[PointSummary]:
        finest = self.study.finest_index()
        reference = outcomes[finest]
        errors = [None if i == finest else terminal_error(o, reference) for i, o in enumerate(outcomes)]
        orders = estimate_order(self.study.values, errors, finest)
        summaries = []
        for i, outcome in enumerate(outcomes):
            summary = PointSummary(i, float(outcome.value), outcome.status, outcome.final_t,
                                   errors[i], orders[i])
            if self.study.axis == 'mollification-index':
                summary.initial_error = initial_error(outcome)
            records = outcome.records
            if records:
                summary.tv_initial = records[0].tv_ax
                summary.tv_max = _max(r.tv_ax for r in records)
                summary.h1_drift = relative_drift([r.H1 for r in records])
                summary.h2_drift = relative_drift([r.H2_form1 for r in records])
                summary.h2_gap = _max(r.h2_gap for r in records)
            if len(records) >= 2:
                summary.envelope_margin = min(
                    growth_envelope(records, name, p).worst_margin()
                    for name in ('u', 'w')
                    for p in envelope_exponents(outcome.config.epsilon)
                )
            summaries.append(summary)
        return summaries

    def invariant_verdicts(self, outcomes: Sequence[PointOutcome]) -> List[Verdict]:
        """Invariant checks pooled over every sample of every finished point."""
        records = [r for o in outcomes for r in o.records]
        finished = [o for o in outcomes if o.records]
        verdicts = []

        def pooled(name: str, measured: float, tolerance: float, detail: str = '') -> None:
            verdicts.append(Verdict(name, bool(measured <= tolerance), float(measured), tolerance, detail))

        pooled('h1-drift', _max(relative_drift([r.H1 for r in o.records]) for o in finished),
               settings.H1_DRIFT_TOL, 'relative')
        pooled('h2-drift', _max(relative_drift([r.H2_form1 for r in o.records]) for o in finished),
               settings.H2_DRIFT_TOL, 'relative')
        pooled('h2-gap', _max(r.h2_gap for r in records), settings.H2_GAP_TOL, 'absolute')
        pooled('sign', _max(
            max(0.0, -min(r.min_u, r.min_w)) / max(r.norm('u', math.inf), r.norm('w', math.inf), 1e-300)
            for r in records), settings.SIGN_TOL, 'relative to sup |u|, |w|')
        pooled('slope', _max(
            max(0.0, r.slope_excess_a, r.slope_excess_c) / max(r.sup_a, r.sup_c, 1e-300)
            for r in records), settings.SLOPE_TOL, 'relative to sup |a|, |c|')
        pooled('l1-identity', _max(
            max(abs(r.l1_a - r.l1_u), abs(r.l1_c - r.l1_w)) / (1.0 + max(r.l1_u, r.l1_w))
            for r in records if min(r.min_u, r.min_w) >= 0.0), settings.L1_IDENTITY_TOL,
            'samples with u, w >= 0')
        pooled('elliptic', _max(r.elliptic_relative for r in records), settings.ELLIPTIC_TOL, 'relative')

        broken = [
            f'point {o.index} {name} p={p:g}'
            for o in finished if len(o.records) >= 2
            for name in ('u', 'w')
            for p in envelope_exponents(o.config.epsilon)
            if not growth_envelope(o.records, name, p).holds()
        ]
        verdicts.append(Verdict('growth-envelopes', not broken, float(len(broken)), 0.0, '; '.join(broken)))

        young = [young_comparison(o.records) for o in finished]
        verdicts.append(Verdict('young-comparison', all(y.holds for y in young),
                                _max(y.worst_ratio for y in young), 1.0 + 1e-8))
        return verdicts

    def axis_verdicts(self, summaries: Sequence[PointSummary]) -> List[Verdict]:
        axis = self.study.axis
        verdicts = []
        if axis == 'time-step':
            orders = [s.order for s in summaries if s.order is not None]
            worst = _max(abs(o - TEMPORAL_ORDER) for o in orders) if orders else math.inf
            verdicts.append(Verdict('temporal-order', worst <= TEMPORAL_ORDER_TOL, worst, TEMPORAL_ORDER_TOL,
                                    'orders ' + ','.join(f'{o:.3f}' for o in orders)))
        elif axis == 'mollification-index':
            errors = [s.initial_error for s in summaries]
            if all(e is not None for e in errors):
                decreasing = all(b < a for a, b in zip(errors, errors[1:]))
                verdicts.append(Verdict('cascade-decreasing', decreasing, float(errors[-1]), float(errors[0]),
                                        'initial H1 error ' + ','.join(f'{e:.3e}' for e in errors)))
            tv = [s.tv_max for s in summaries if s.tv_max is not None]
            if tv:
                bound = settings.TV_BOUND_FACTOR * tv[0]
                verdicts.append(Verdict('tv-bounded', max(tv) <= bound, max(tv), bound,
                                        'max TV(a_x) per point ' + ','.join(f'{v:.4g}' for v in tv)))
        else:
            errors = [s.terminal_error for s in summaries if s.terminal_error is not None]
            ok = all(b <= a or b <= ERROR_FLOOR for a, b in zip(errors, errors[1:]))
            verdicts.append(Verdict('grid-convergence', ok, errors[-1] if errors else math.inf,
                                    errors[0] if errors else 0.0,
                                    'terminal errors ' + ','.join(f'{e:.3e}' for e in errors)))
        return verdicts

    def write_artifacts(self, report: StudyReport) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        with open(self.out_dir / SUMMARY_FILE, 'w', newline='') as handle:
            handle.write(f'# sweep-axis={report.axis}\n')
            handle.write(f'# manifest-sha256={self.study.base.manifest_hash()}\n')
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(SUMMARY_COLUMNS)
            for point in report.points:
                writer.writerow(point.to_row())
        payload = {
            'axis': report.axis,
            'values': list(self.study.values),
            'exit_code': report.exit_code,
            'verdicts': [asdict(v) for v in report.verdicts],
        }
        (self.out_dir / VERDICTS_FILE).write_text(json.dumps(payload, indent=2, default=str) + '\n')

    def execute(self) -> StudyReport:
        logger.info('Study over %s: %s', self.study.axis, ','.join(map(str, self.study.values)))
        outcomes = self.run_points()
        summaries = self.summarize(outcomes)
        verdicts = self.invariant_verdicts(outcomes) + self.axis_verdicts(summaries)
        report = StudyReport(self.study.axis, summaries, verdicts)

        if any(o.exit_code == EXIT_BLOWUP for o in outcomes):
            report.exit_code = EXIT_BLOWUP
        elif any(o.exit_code == EXIT_CONFIG for o in outcomes):
            report.exit_code = EXIT_CONFIG
        elif not report.passed:
            report.exit_code = EXIT_ASSERTION

        for verdict in report.failed():
            logger.warning('Study verdict failed: %s measured=%.3e tolerance=%.3e %s',
                           verdict.name, verdict.measured, verdict.tolerance, verdict.detail)
        self.write_artifacts(report)
        return report


def execute_study(study: StudyConfig) -> StudyReport:
    return StudyRunner(study).execute()