"""
Background work units for studies.

Each sweep point runs as one task. Tasks take and return plain
picklable objects so the study runner can hand them to a process pool
as easily as calling them in a loop. A failing point never raises out
of its task: the outcome carries the status and message instead.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from diagnostics.records import DiagnosticsRecord
from numerics.exceptions import TricamError
from runs.run_config import RunConfig
from runs.services.run_manager import EXIT_CONFIG, RunManager

logger = logging.getLogger('runs')


@dataclass
class PointOutcome:
    """Result of one sweep point."""

    index: int
    value: float
    config: RunConfig
    status: str
    exit_code: int
    message: str = ''
    records: List[DiagnosticsRecord] = field(default_factory=list)
    final_a: Optional[np.ndarray] = None
    final_c: Optional[np.ndarray] = None
    final_t: Optional[float] = None

    @property
    def success(self) -> bool:
        return self.exit_code == 0


def run_study_point(index: int, value: float, config: RunConfig) -> PointOutcome:
    """Run one sweep point to completion and report how it went."""
    try:
        result = RunManager(config).execute()
    except TricamError as exc:
        logger.error('Sweep point %d (%s) failed before stepping: %s', index, value, exc)
        return PointOutcome(index, value, config, 'config-error', EXIT_CONFIG, str(exc))

    final = result.final_state
    outcome = PointOutcome(
        index=index,
        value=value,
        config=config,
        status=result.status,
        exit_code=result.exit_code,
        message=result.message,
        records=result.records,
        final_a=None if final is None else np.array(final.a.values),
        final_c=None if final is None else np.array(final.c.values),
        final_t=None if final is None else final.t,
    )
    logger.info('Sweep point %d (%s): %s', index, value, outcome.status)
    return outcome
