import json
import math
from unittest.mock import patch

import numpy as np
import pytest

from config import settings
from diagnostics.records import CSV_COLUMNS
from numerics.exceptions import CflViolationError
from runs.services.run_manager import (
    DIAGNOSTICS_FILE,
    EXIT_BLOWUP,
    EXIT_CONFIG,
    EXIT_OK,
    MANIFEST_FILE,
    execute_run,
    read_diagnostics,
    relative_drift,
)
from runs.services.snapshot_store import read_snapshot
from runs.tests.factories import RunConfigFactory
from runs.utils.validators import ConfigValidationError


class TestRunArtifacts:
    """What a finished run writes to its directory."""

    def test_zero_data_gives_zero_columns(self, tmp_path):
        config = RunConfigFactory(amplitude=0.0, out=str(tmp_path))
        result = execute_run(config)
        assert result.exit_code == EXIT_OK
        rows = read_diagnostics(tmp_path / DIAGNOSTICS_FILE)
        assert len(rows) >= 2
        for row in rows:
            assert all(row[name] == 0.0 for name in CSV_COLUMNS if name != 't')

    def test_csv_header_block(self, tmp_path):
        config = RunConfigFactory(out=str(tmp_path))
        execute_run(config)
        lines = (tmp_path / DIAGNOSTICS_FILE).read_text().splitlines()
        assert lines[0] == f'# manifest-sha256={config.manifest_hash()}'
        assert lines[1].split(',') == list(CSV_COLUMNS)

    def test_one_row_per_observation(self, tmp_path):
        result = execute_run(RunConfigFactory(out=str(tmp_path), dt=0.05, stride=1))
        rows = read_diagnostics(tmp_path / DIAGNOSTICS_FILE)
        assert [row['t'] for row in rows] == pytest.approx([0.0, 0.05, 0.1, 0.15, 0.2])
        assert len(result.records) == len(rows)

    def test_manifest(self, tmp_path):
        config = RunConfigFactory(out=str(tmp_path))
        result = execute_run(config)
        manifest = json.loads((tmp_path / MANIFEST_FILE).read_text())
        assert manifest['status'] == 'ok'
        assert manifest['version'] == settings.VERSION
        assert manifest['manifest_sha256'] == config.manifest_hash()
        assert manifest['config']['grid_n'] == 1024
        assert manifest['wall_clock_seconds'] >= 0.0
        assert manifest['steps'] == result.steps

    def test_identical_configs_write_identical_csv(self, tmp_path):
        first = execute_run(RunConfigFactory(out=str(tmp_path / 'one')))
        second = execute_run(RunConfigFactory(out=str(tmp_path / 'two')))
        assert first.ok and second.ok
        assert ((tmp_path / 'one' / DIAGNOSTICS_FILE).read_bytes()
                == (tmp_path / 'two' / DIAGNOSTICS_FILE).read_bytes())

    def test_final_snapshot_written(self, tmp_path):
        result = execute_run(RunConfigFactory(out=str(tmp_path), snapshot_format='tcs'))
        assert len(result.snapshot_paths) == 1
        data = read_snapshot(result.snapshot_paths[0])
        assert data.t == pytest.approx(0.2)
        np.testing.assert_array_equal(data.columns['a'], result.final_state.a.values)

    def test_snapshot_every(self, tmp_path):
        result = execute_run(RunConfigFactory(out=str(tmp_path), dt=0.05, snapshot_every=2))
        names = [p.name for p in result.snapshot_paths]
        assert names == ['snapshot_0000.csv', 'snapshot_0002.csv', 'snapshot_0004.csv']

    def test_conserved_quantities_in_csv(self, tmp_path):
        execute_run(RunConfigFactory(out=str(tmp_path), t_end=0.5))
        rows = read_diagnostics(tmp_path / DIAGNOSTICS_FILE)
        assert relative_drift([row['H1'] for row in rows]) <= settings.H1_DRIFT_TOL
        assert max(abs(row['H2_form1'] - row['H2_form2']) for row in rows) <= settings.H2_GAP_TOL


class TestRunFailures:
    """Aborted runs keep their partial artifacts and map to exit codes."""

    def test_blow_up_keeps_partial_artifacts(self, tmp_path):
        result = execute_run(RunConfigFactory(out=str(tmp_path), blowup_cap=1e-3))
        assert result.exit_code == EXIT_BLOWUP
        assert result.status == 'blow-up'
        assert result.message.startswith('blow-up t=')
        assert len(read_diagnostics(tmp_path / DIAGNOSTICS_FILE)) == 1
        assert result.snapshot_paths
        manifest = json.loads((tmp_path / MANIFEST_FILE).read_text())
        assert manifest['status'] == 'blow-up'
        assert manifest['exit_code'] == EXIT_BLOWUP

    @patch('runs.services.run_manager.TimeIntegrator.evolve')
    def test_strict_cfl_violation_is_a_config_error(self, mock_evolve, tmp_path):
        mock_evolve.side_effect = CflViolationError('|dt|=1 exceeds CFL limit')
        result = execute_run(RunConfigFactory(out=str(tmp_path), dt=1.0, strict_cfl=True))
        assert result.exit_code == EXIT_CONFIG
        assert result.message.startswith('config-error key=dt value=1.0')

    def test_profile_outside_grid_is_a_config_error(self, tmp_path):
        config = RunConfigFactory(out=str(tmp_path), profile='gaussian-bump', centre=19.0)
        with pytest.raises(ConfigValidationError) as info:
            execute_run(config)
        assert info.value.key == 'profile'


class TestRelativeDrift:
    """Drift of a conserved series."""

    def test_relative(self):
        assert relative_drift([2.0, 2.0, 2.002]) == pytest.approx(1e-3)

    def test_zero_start_falls_back_to_absolute(self):
        assert relative_drift([0.0, 1e-12]) == pytest.approx(1e-12)


@pytest.mark.slow
class TestSmoothedPeakonRun:
    """Smoothed two-peakon pair on the default grid evolved to t = 5."""

    @pytest.fixture(scope='class')
    def result(self, tmp_path_factory):
        config = RunConfigFactory(profile='smoothed-peakon', t_end=5.0, cfl=0.3, stride=10,
                                  out=str(tmp_path_factory.mktemp('smoothed_peakon')))
        return execute_run(config)

    def test_finishes_in_bounded_steps(self, result):
        assert result.exit_code == EXIT_OK, result.message
        assert result.final_state.t == 5.0
        assert result.steps >= 5.0 / result.config.max_dt

    def test_conserved_quantities(self, result):
        records = result.records
        assert relative_drift([r.H1 for r in records]) <= settings.H1_DRIFT_TOL
        assert relative_drift([r.H2_form1 for r in records]) <= settings.H2_DRIFT_TOL
        assert max(r.h2_gap for r in records) <= settings.H2_GAP_TOL

    def test_sign_and_slope_preserved(self, result):
        for r in result.records:
            sup_momentum = max(r.norm('u', math.inf), r.norm('w', math.inf))
            assert min(r.min_u, r.min_w) >= -settings.SIGN_TOL * sup_momentum, r.t
            assert max(r.slope_excess_a, r.slope_excess_c) <= settings.SLOPE_TOL * max(r.sup_a, r.sup_c), r.t
