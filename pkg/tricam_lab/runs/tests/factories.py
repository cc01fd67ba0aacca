import math

import factory
import numpy as np

from diagnostics.tests.factories import DiagnosticsRecordFactory
from runs.run_config import RunConfig
from runs.tasks import PointOutcome


class RunConfigFactory(factory.Factory):
    """Short two-bump run on the default grid."""

    class Meta:
        model = RunConfig

    domain_l = 20.0
    grid_n = 1024
    t_end = 0.2
    dt = None
    profile = 'two-bump'
    amplitude = 1.0
    width = 1.0
    separation = 4.0
    w_ratio = 0.5
    moll_n = 4
    seed = 0
    stride = 1
    snapshot_format = 'csv'
    snapshot_every = 0


def steady_records(count=3, t_end=0.2, tv_ax=1.0):
    """Records with constant unit norms, so every envelope and pooled check holds."""
    norms = {(name, p): 1.0 for name in ('a', 'c', 'u', 'w') for p in (1.0, 2.0, math.inf)}
    return [
        DiagnosticsRecordFactory(t=t, tv_ax=tv_ax, sup_a=1.0, sup_c=1.0, norms=norms)
        for t in np.linspace(0.0, t_end, count)
    ]


def point_outcome(index, value, config, final_a, status='ok', exit_code=0, records=None, tv_ax=1.0):
    """A finished sweep point with (a, c) = (final_a, final_a) at t_end."""
    final_a = np.asarray(final_a, dtype=float)
    return PointOutcome(
        index=index,
        value=value,
        config=config,
        status=status,
        exit_code=exit_code,
        records=steady_records(t_end=config.t_end, tv_ax=tv_ax) if records is None else records,
        final_a=final_a,
        final_c=final_a.copy(),
        final_t=config.t_end,
    )


def fake_runner(errors_of, **outcome_kwargs):
    """side_effect for run_study_point: final a = 1 + errors_of(value), per-point kwargs by index."""
    def run(index, value, config):
        kwargs = {k: v[index] for k, v in outcome_kwargs.items()}
        return point_outcome(index, value, config, np.full(64, 1.0 + errors_of(value)), **kwargs)
    return run
