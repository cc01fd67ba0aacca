"""
Run manager service.

Owns one run directory: builds the initial data, drives the time
integrator and streams what the observer sees to disk as it goes, so a
blow-up still leaves every row and snapshot written up to that point.

Layout of a run directory:

    diagnostics.csv        '# manifest-sha256=...', header, one row per observation
    manifest.json          config, version, hash, status, wall-clock
    snapshot_XXXX.<fmt>    field snapshots (csv or tcs)
"""
import csv
import json
import logging
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, TextIO

import numpy as np

from config import settings
from diagnostics.records import CSV_COLUMNS, DiagnosticsRecord
from diagnostics.services.monitors import InvariantMonitor
from dynamics.services.rhs_assembler import RhsAssembler
from dynamics.services.time_integrator import TimeIntegrator
from dynamics.state import Snapshot, State
from initdata.services.profiles import admissible_profiles, lift_initial
from numerics.exceptions import (
    BlowUpError,
    CflViolationError,
    InvalidParameterError,
    OutOfDomainError,
    UnderResolvedSupportError,
)
from numerics.field import Field
from runs.run_config import RunConfig
from runs.services.snapshot_store import MANIFEST_FILE, SnapshotData, snapshot_filename, write_snapshot
from runs.utils.validators import ConfigValidationError

logger = logging.getLogger('runs')

EXIT_OK = 0
EXIT_ASSERTION = 1
EXIT_CONFIG = 2
EXIT_BLOWUP = 3

DIAGNOSTICS_FILE = 'diagnostics.csv'


@dataclass
class RunResult:
    """What a finished (or aborted) run leaves behind."""

    config: RunConfig
    status: str
    exit_code: int
    out_dir: Path
    records: List[DiagnosticsRecord] = field(default_factory=list)
    final_state: Optional[State] = None
    snapshot_paths: List[Path] = field(default_factory=list)
    message: str = ''
    steps: int = 0
    wall_clock: float = 0.0

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK


class RunObserver:
    """
    Observer handed to the integrator.
    Writes one diagnostics row per call and every snapshot_every-th snapshot.
    """

    def __init__(self, handle: TextIO, monitor: InvariantMonitor, out_dir: Path,
                 manifest_hash: str, snapshot_format: str, snapshot_every: int) -> None:
        self.writer = csv.writer(handle, lineterminator='\n')
        self.handle = handle
        self.monitor = monitor
        self.out_dir = out_dir
        self.manifest_hash = manifest_hash
        self.snapshot_format = snapshot_format
        self.snapshot_every = snapshot_every
        self.records: List[DiagnosticsRecord] = []
        self.snapshot_paths: List[Path] = []
        self.last: Optional[Snapshot] = None
        self._last_written = -1

    def __call__(self, state: State, b: Field) -> None:
        record = self.monitor.record(state, b)
        if not record.is_finite():
            logger.warning('Non-finite diagnostics at t=%.6f', record.t)
        self.writer.writerow(record.to_row())
        self.handle.flush()
        self.records.append(record)
        self.last = Snapshot(state, b)
        index = len(self.records) - 1
        if self.snapshot_every and index % self.snapshot_every == 0:
            self.write_snapshot(index)

    def write_snapshot(self, index: int) -> None:
        if self.last is None or index == self._last_written:
            return
        u, w = self.monitor.momenta(self.last.state)
        data = SnapshotData.from_snapshot(self.last, u, w, self.manifest_hash, self.monitor.assembler)
        path = write_snapshot(self.out_dir / snapshot_filename(index, self.snapshot_format), data)
        self.snapshot_paths.append(path)
        self._last_written = index

    def finish(self) -> None:
        """The last observed state always gets a snapshot."""
        self.write_snapshot(len(self.records) - 1)


class RunManager:
    """Runs one validated RunConfig and writes its artifacts."""

    def __init__(self, config: RunConfig) -> None:
        self.config = config
        self.out_dir = Path(config.out)
        self.manifest_hash = config.manifest_hash()

    def build_initial_state(self, assembler: RhsAssembler) -> State:
        grid = self.config.grid()
        u0, w0 = admissible_profiles(self.config.profile, self.config.profile_params(), grid)
        return State(0.0, lift_initial(u0, assembler.backend), lift_initial(w0, assembler.backend))

    def build_assembler(self) -> RhsAssembler:
        return RhsAssembler(self.config.backend, self.config.derivative_backend, self.config.dealias)

    def write_manifest(self, result: RunResult, started_at: str) -> None:
        manifest = {
            'config': self.config.to_dict(),
            'version': settings.VERSION,
            'manifest_sha256': self.manifest_hash,
            'started_at': started_at,
            'wall_clock_seconds': result.wall_clock,
            'status': result.status,
            'exit_code': result.exit_code,
            'steps': result.steps,
            'observations': len(result.records),
            'final_t': result.final_state.t if result.final_state is not None else None,
            'message': result.message,
            'snapshots': [p.name for p in result.snapshot_paths],
        }
        (self.out_dir / MANIFEST_FILE).write_text(json.dumps(manifest, indent=2, sort_keys=True) + '\n')

    def execute(self) -> RunResult:
        config = self.config
        started_at = datetime.now(timezone.utc).isoformat()
        start = time.perf_counter()
        self.out_dir.mkdir(parents=True, exist_ok=True)

        assembler = self.build_assembler()
        try:
            s0 = self.build_initial_state(assembler)
        except (InvalidParameterError, OutOfDomainError, UnderResolvedSupportError) as exc:
            raise ConfigValidationError('profile', config.profile, str(exc)) from exc

        monitor = InvariantMonitor(assembler, config.epsilon)
        integrator = TimeIntegrator(assembler, config.cfl, config.strict_cfl, config.blowup_cap,
                                    max_dt=config.max_dt)
        logger.info('Run %s: profile=%s n=%d t_end=%g -> %s',
                    self.manifest_hash[:12], config.profile, config.grid_n, config.t_end, self.out_dir)

        status, exit_code, message = 'ok', EXIT_OK, ''
        final_state = None
        with open(self.out_dir / DIAGNOSTICS_FILE, 'w', newline='') as handle:
            handle.write(f'# manifest-sha256={self.manifest_hash}\n')
            csv.writer(handle, lineterminator='\n').writerow(CSV_COLUMNS)
            observer = RunObserver(handle, monitor, self.out_dir, self.manifest_hash,
                                   config.snapshot_format, config.snapshot_every)
            try:
                final_state = integrator.evolve(s0, config.t_end, config.dt, observer, config.stride)
            except BlowUpError as exc:
                status, exit_code, message = 'blow-up', EXIT_BLOWUP, exc.report()
                logger.error('Run aborted, partial artifacts kept in %s: %s', self.out_dir, message)
            except CflViolationError as exc:
                status, exit_code = 'config-error', EXIT_CONFIG
                message = str(ConfigValidationError('dt', config.dt, str(exc)))
                logger.error(message)
            observer.finish()

        if final_state is None and observer.last is not None:
            final_state = observer.last.state
        result = RunResult(
            config=config,
            status=status,
            exit_code=exit_code,
            out_dir=self.out_dir,
            records=observer.records,
            final_state=final_state,
            snapshot_paths=observer.snapshot_paths,
            message=message,
            steps=integrator.steps_taken,
            wall_clock=time.perf_counter() - start,
        )
        self.write_manifest(result, started_at)
        logger.info('Run %s finished: status=%s steps=%d rows=%d (%.2f s)',
                    self.manifest_hash[:12], status, result.steps, len(result.records), result.wall_clock)
        return result


def execute_run(config: RunConfig) -> RunResult:
    return RunManager(config).execute()


def read_diagnostics(path) -> List[dict]:
    """Rows of a diagnostics CSV as dicts of floats, comment lines skipped."""
    with open(path, newline='') as handle:
        lines = [line for line in handle if not line.startswith('#')]
    reader = csv.DictReader(lines)
    return [{key: float(value) for key, value in row.items()} for row in reader]


def relative_drift(series: np.ndarray) -> float:
    """max |x(t) - x(0)| / |x(0)|, or the absolute drift when x(0) = 0."""
    series = np.asarray(series, dtype=float)
    scale = abs(series[0]) or 1.0
    return float(np.max(np.abs(series - series[0]))) / scale
