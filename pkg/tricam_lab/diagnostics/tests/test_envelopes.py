import math

import pytest

from diagnostics.services.envelopes import (
    growth_constant,
    growth_envelope,
    spacetime_variation,
    young_comparison,
)
from diagnostics.services.monitors import InvariantMonitor
from diagnostics.tests.factories import DiagnosticsRecordFactory, TrajectoryFactory
from dynamics.state import State
from numerics.exceptions import EmptyTrajectoryError, InvalidParameterError
from numerics.tests.factories import GridFactory


@pytest.fixture(scope='module')
def two_bump_run():
    """Snapshots and records of a one-unit-time admissible run."""
    trajectory = TrajectoryFactory(t_end=1.0, stride=10)
    monitor = InvariantMonitor()
    return trajectory, [monitor.record(snap.state, snap.b) for snap in trajectory]


class TestGrowthConstant:
    """Tests for the Gronwall coefficient."""

    def test_takes_worst_sample(self):
        records = [
            DiagnosticsRecordFactory(bx_sup=0.1, coupling_sup=0.2),
            DiagnosticsRecordFactory(bx_sup=0.3, coupling_sup=0.0),
        ]
        assert growth_constant(records) == pytest.approx(0.45)


class TestGrowthEnvelope:
    """Tests for the L^p growth envelopes of u and w."""

    def test_zero_trajectory_is_trivial(self):
        records = [
            DiagnosticsRecordFactory(t=0.0, norms={('u', 1.0): 0.0}),
            DiagnosticsRecordFactory(t=1.0, norms={('u', 1.0): 0.0}),
        ]
        envelope = growth_envelope(records, 'u', 1.0)
        assert envelope.C_T == 0.0
        assert envelope.envelope_series == (0.0, 0.0)
        assert envelope.holds()

    def test_single_record_rejected(self):
        with pytest.raises(EmptyTrajectoryError):
            growth_envelope([DiagnosticsRecordFactory()], 'u', 1.0)

    def test_unknown_field_rejected(self):
        records = [DiagnosticsRecordFactory(), DiagnosticsRecordFactory()]
        with pytest.raises(InvalidParameterError):
            growth_envelope(records, 'b', 1.0)

    def test_detects_growth_beyond_envelope(self):
        records = [
            DiagnosticsRecordFactory(t=0.0, bx_sup=0.2, norms={('u', 1.0): 1.0}),
            DiagnosticsRecordFactory(t=1.0, bx_sup=0.2, norms={('u', 1.0): 1.5}),
        ]
        envelope = growth_envelope(records, 'u', 1.0)
        assert envelope.envelope_series[1] == pytest.approx(math.exp(0.3))
        assert not envelope.holds()
        assert envelope.worst_margin() < 0.0

    @pytest.mark.parametrize('field', ['u', 'w'])
    @pytest.mark.parametrize('p', [1.0, 2.0, math.inf])
    def test_admissible_run_stays_below(self, two_bump_run, field, p):
        _, records = two_bump_run
        envelope = growth_envelope(records, field, p)
        assert envelope.C_T > 0.0
        assert envelope.holds()


class TestYoungComparison:
    """‖a‖_p ≤ ‖u‖_p and ‖c‖_p ≤ ‖w‖_p along a run."""

    def test_admissible_run(self, two_bump_run):
        _, records = two_bump_run
        comparison = young_comparison(records)
        assert comparison.holds
        assert comparison.worst_ratio <= 1.0 + 1e-8

    def test_violation_reported(self):
        record = DiagnosticsRecordFactory(norms={('a', 1.0): 2.0, ('u', 1.0): 1.0})
        comparison = young_comparison([record])
        assert not comparison.holds
        assert comparison.violations[0][1:] == ('a', 1.0)


class TestSpacetimeVariation:
    """Tests for the space-time variation of a, c and b."""

    def test_zero_run(self):
        trajectory = TrajectoryFactory(state=State.zeros(GridFactory()), t_end=0.1)
        assert spacetime_variation(trajectory, 'a') == 0.0

    @pytest.mark.parametrize('component', ['a', 'c', 'b'])
    def test_finite_and_positive(self, two_bump_run, component):
        trajectory, _ = two_bump_run
        value = spacetime_variation(trajectory, component)
        assert math.isfinite(value)
        assert value > 0.0

    def test_stable_under_slice_refinement(self):
        trajectory = TrajectoryFactory(t_end=0.4, stride=1)
        fine = spacetime_variation(trajectory, 'a')
        coarse = spacetime_variation(trajectory[::4], 'a')
        assert coarse == pytest.approx(fine, rel=1e-2)

    def test_unknown_component_rejected(self, two_bump_run):
        trajectory, _ = two_bump_run
        with pytest.raises(InvalidParameterError):
            spacetime_variation(trajectory, 'u')

    def test_single_snapshot_rejected(self, two_bump_run):
        trajectory, _ = two_bump_run
        with pytest.raises(EmptyTrajectoryError):
            spacetime_variation(trajectory[:1], 'a')
