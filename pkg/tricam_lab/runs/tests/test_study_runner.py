import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from unittest.mock import patch

import pytest

from runs.run_config import StudyConfig
from runs.services.run_manager import EXIT_ASSERTION, EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK
from runs.services.study_runner import (
    SUMMARY_COLUMNS,
    SUMMARY_FILE,
    VERDICTS_FILE,
    StudyRunner,
    estimate_order,
    execute_study,
)
from runs.tests.factories import RunConfigFactory, fake_runner


def verdicts_by_name(report):
    return {v.name: v for v in report.verdicts}


class TestEstimateOrder:
    """Observed orders from terminal errors against the finest point."""

    def test_time_step_axis(self):
        values = (0.01, 0.02, 0.04)
        errors = [None, 15.0, 255.0]
        orders = estimate_order(values, errors, finest=0)
        assert orders[0] is None and orders[1] is None
        assert orders[2] == pytest.approx(math.log2(17.0))

    def test_resolution_axis(self):
        values = (8, 16, 32, 64)
        errors = [8e-2, 2e-2, 5e-3, None]
        orders = estimate_order(values, errors, finest=3)
        assert orders[0] == pytest.approx(2.0)
        assert orders[1] == pytest.approx(2.0)
        assert orders[2] is None and orders[3] is None

    def test_zero_error_skipped(self):
        assert estimate_order((1.0, 2.0, 4.0), [None, 0.0, 1.0], finest=0) == [None, None, None]


class TestStudyVerdicts:
    """Verdict logic with the sweep points mocked out."""

    def setup_method(self):
        self.base = RunConfigFactory(t_end=0.4)

    @patch('runs.services.study_runner.run_study_point')
    def test_fourth_order_time_sweep_passes(self, mock_point, tmp_path):
        mock_point.side_effect = fake_runner(lambda dt: 1e3 * (dt ** 4 - 0.01 ** 4))
        study = StudyConfig(self.base.with_changes(out=str(tmp_path)), 'time-step', (0.01, 0.02, 0.04))
        report = execute_study(study)
        verdict = verdicts_by_name(report)['temporal-order']
        assert verdict.passed
        assert report.exit_code == EXIT_OK
        assert mock_point.call_count == 3

    @patch('runs.services.study_runner.run_study_point')
    def test_second_order_time_sweep_fails(self, mock_point, tmp_path):
        mock_point.side_effect = fake_runner(lambda dt: 10.0 * (dt ** 2 - 0.01 ** 2))
        study = StudyConfig(self.base.with_changes(out=str(tmp_path)), 'time-step', (0.01, 0.02, 0.04))
        report = execute_study(study)
        assert not verdicts_by_name(report)['temporal-order'].passed
        assert report.exit_code == EXIT_ASSERTION

    @patch('runs.services.study_runner.run_study_point')
    def test_blow_up_wins_over_failed_verdicts(self, mock_point, tmp_path):
        mock_point.side_effect = fake_runner(
            lambda dt: 10.0 * (dt ** 2 - 0.01 ** 2),
            status=['ok', 'ok', 'blow-up'],
            exit_code=[EXIT_OK, EXIT_OK, EXIT_BLOWUP],
        )
        study = StudyConfig(self.base.with_changes(out=str(tmp_path)), 'time-step', (0.01, 0.02, 0.04))
        report = execute_study(study)
        assert report.exit_code == EXIT_BLOWUP
        assert [p.status for p in report.points] == ['ok', 'ok', 'blow-up']

    @patch('runs.services.study_runner.run_study_point')
    def test_config_error_point_reported(self, mock_point, tmp_path):
        mock_point.side_effect = fake_runner(
            lambda dt: 1e3 * (dt ** 4 - 0.01 ** 4),
            exit_code=[EXIT_OK, EXIT_CONFIG, EXIT_OK],
        )
        study = StudyConfig(self.base.with_changes(out=str(tmp_path)), 'time-step', (0.01, 0.02, 0.04))
        assert execute_study(study).exit_code == EXIT_CONFIG

    @patch('runs.services.study_runner.run_study_point')
    def test_mollification_cascade(self, mock_point, tmp_path):
        base = RunConfigFactory(profile='smoothed-peakon', domain_l=8.0, grid_n=4096, out=str(tmp_path))
        mock_point.side_effect = fake_runner(lambda n: 1.0 / n ** 2, tv_ax=[1.0, 1.2, 1.3, 1.35])
        study = StudyConfig(base, 'mollification-index', (8, 16, 32, 64))
        report = execute_study(study)
        verdicts = verdicts_by_name(report)
        assert verdicts['cascade-decreasing'].passed
        assert verdicts['tv-bounded'].passed
        errors = [p.initial_error for p in report.points]
        assert all(b < a for a, b in zip(errors, errors[1:]))

    @patch('runs.services.study_runner.run_study_point')
    def test_unbounded_variation_fails(self, mock_point, tmp_path):
        base = RunConfigFactory(profile='smoothed-peakon', domain_l=8.0, grid_n=4096, out=str(tmp_path))
        mock_point.side_effect = fake_runner(lambda n: 1.0 / n ** 2, tv_ax=[1.0, 2.0, 4.0, 8.0])
        report = execute_study(StudyConfig(base, 'mollification-index', (8, 16, 32, 64)))
        assert not verdicts_by_name(report)['tv-bounded'].passed
        assert report.exit_code == EXIT_ASSERTION

    @patch('runs.services.study_runner.run_study_point')
    def test_grid_sweep(self, mock_point, tmp_path):
        mock_point.side_effect = fake_runner(lambda n: math.exp(-n / 64.0))
        study = StudyConfig(self.base.with_changes(out=str(tmp_path)), 'grid-resolution', (256, 512, 1024))
        report = execute_study(study)
        assert verdicts_by_name(report)['grid-convergence'].passed
        assert report.points[-1].terminal_error is None

    @patch('runs.services.study_runner.run_study_point')
    def test_artifacts(self, mock_point, tmp_path):
        mock_point.side_effect = fake_runner(lambda dt: 1e3 * (dt ** 4 - 0.01 ** 4))
        study = StudyConfig(self.base.with_changes(out=str(tmp_path)), 'time-step', (0.01, 0.02, 0.04))
        execute_study(study)
        with open(tmp_path / SUMMARY_FILE, newline='') as handle:
            lines = [line for line in handle if not line.startswith('#')]
        rows = list(csv.DictReader(lines))
        assert tuple(rows[0].keys()) == SUMMARY_COLUMNS
        assert [float(row['value']) for row in rows] == [0.01, 0.02, 0.04]
        assert all(row['order'] == '' for row in rows[:2])
        verdicts = json.loads((tmp_path / VERDICTS_FILE).read_text())
        assert verdicts['axis'] == 'time-step'
        assert {v['name'] for v in verdicts['verdicts']} >= {'h1-drift', 'sign', 'temporal-order'}

    @patch('runs.services.study_runner.ProcessPoolExecutor', ThreadPoolExecutor)
    @patch('runs.services.study_runner.run_study_point')
    def test_parallel_points_keep_order(self, mock_point, tmp_path):
        mock_point.side_effect = fake_runner(lambda dt: 1e3 * (dt ** 4 - 0.01 ** 4))
        study = StudyConfig(self.base.with_changes(out=str(tmp_path)), 'time-step',
                            (0.01, 0.02, 0.04), parallel=True, workers=3)
        report = StudyRunner(study).execute()
        assert [p.index for p in report.points] == [0, 1, 2]
        assert report.exit_code == EXIT_OK


@pytest.mark.slow
class TestTimeStepStudy:
    """End-to-end RK4 self-convergence on smooth data."""

    def test_fourth_order(self, tmp_path):
        base = RunConfigFactory(t_end=0.4, stride=10, out=str(tmp_path))
        study = StudyConfig(base, 'time-step', (0.0025, 0.01, 0.02, 0.04))
        report = execute_study(study)
        verdict = verdicts_by_name(report)['temporal-order']
        assert verdict.passed, verdict.detail
        assert all(p.status == 'ok' for p in report.points)
        assert (tmp_path / 'point_00' / 'diagnostics.csv').exists()


@pytest.mark.slow
class TestMollificationCascade:
    """Every real cascade member on the fine grid passes the invariant checks."""

    def test_members_pass_invariants(self, tmp_path):
        base = RunConfigFactory(profile='smoothed-peakon', domain_l=8.0, grid_n=4096,
                                t_end=0.1, stride=5, out=str(tmp_path))
        report = execute_study(StudyConfig(base, 'mollification-index', (8, 16, 32, 64)))
        verdicts = verdicts_by_name(report)
        for name in ('h1-drift', 'h2-drift', 'h2-gap', 'sign', 'slope', 'l1-identity', 'growth-envelopes'):
            assert verdicts[name].passed, (name, verdicts[name].measured, verdicts[name].detail)
        assert verdicts['cascade-decreasing'].passed
        assert all(p.status == 'ok' for p in report.points)
        assert all(p.final_t == pytest.approx(0.1) for p in report.points)
