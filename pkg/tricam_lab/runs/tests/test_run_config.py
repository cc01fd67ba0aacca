import pytest

from config import settings
from runs.run_config import RunConfig, StudyConfig, optional_float
from runs.tests.factories import RunConfigFactory
from runs.utils.validators import ConfigValidationError

TWO_BUMP_FILE = '# test config\nTRICAM_PROFILE=two-bump\nTRICAM_GRID_N=256\nTRICAM_T_END=0.5\n'


@pytest.fixture
def clean_env(monkeypatch):
    """Drop every TRICAM_* override except the output root set by conftest."""
    for key in ('GRID_N', 'T_END', 'PROFILE', 'DT', 'STRICT_CFL', 'SWEEP_AXIS', 'SWEEP_VALUES'):
        monkeypatch.delenv(f'TRICAM_{key}', raising=False)
    return monkeypatch


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / 'run.env'
    path.write_text(TWO_BUMP_FILE)
    return str(path)


class TestRunConfigSources:
    """Flag beats environment beats file beats settings."""

    def test_settings_defaults(self, clean_env):
        config = RunConfig.from_sources()
        assert config.grid_n == settings.DEFAULT_GRID_N
        assert config.profile == settings.DEFAULT_PROFILE
        assert config.dt is None

    def test_file_beats_default(self, clean_env, config_file):
        config = RunConfig.from_sources({}, config_file)
        assert config.profile == 'two-bump'
        assert config.grid_n == 256
        assert config.t_end == 0.5

    def test_env_beats_file(self, clean_env, config_file):
        clean_env.setenv('TRICAM_GRID_N', '512')
        assert RunConfig.from_sources({}, config_file).grid_n == 512

    def test_flag_beats_env(self, clean_env, config_file):
        clean_env.setenv('TRICAM_GRID_N', '512')
        assert RunConfig.from_sources({'grid_n': 128}, config_file).grid_n == 128

    def test_boolean_from_env(self, clean_env, config_file):
        clean_env.setenv('TRICAM_STRICT_CFL', 'true')
        assert RunConfig.from_sources({}, config_file).strict_cfl is True

    def test_missing_file(self, clean_env, tmp_path):
        with pytest.raises(ConfigValidationError) as info:
            RunConfig.from_sources({}, str(tmp_path / 'nope.env'))
        assert info.value.key == 'config'

    def test_uncastable_value_names_key(self, clean_env, config_file):
        clean_env.setenv('TRICAM_GRID_N', 'many')
        with pytest.raises(ConfigValidationError) as info:
            RunConfig.from_sources({}, config_file)
        assert info.value.key == 'grid_n'
        assert str(info.value).startswith('config-error key=grid_n value=many')

    def test_auto_dt(self):
        assert optional_float('auto') is None
        assert optional_float('') is None
        assert optional_float('0.25') == 0.25


class TestRunConfigValidation:
    """Rejected configs name the offending key."""

    @pytest.mark.parametrize('changes, key', [
        ({'dt': 0.0}, 'dt'),
        ({'dt': -0.1}, 'dt'),
        ({'grid_n': 8}, 'grid_n'),
        ({'cfl': 0.0}, 'cfl'),
        ({'backend': 'wavelet'}, 'backend'),
        ({'derivative_backend': 'chebyshev'}, 'derivative_backend'),
        ({'profile': 'square-wave'}, 'profile'),
        ({'stride': 0}, 'stride'),
        ({'snapshot_format': 'hdf5'}, 'snapshot_format'),
        ({'separation': 1.0}, 'separation'),
        ({'separation': 60.0}, 'separation'),
        ({'profile': 'smoothed-peakon', 'moll_n': 8}, 'moll_n'),
        ({'grid_n': float('nan')}, 'grid_n'),
        ({'stride': float('inf')}, 'stride'),
        ({'max_dt': 0.0}, 'max_dt'),
        ({'max_dt': float('nan')}, 'max_dt'),
    ])
    def test_rejected(self, changes, key):
        with pytest.raises(ConfigValidationError) as info:
            RunConfigFactory(**changes).validate()
        assert info.value.key == key

    def test_non_finite_integer_flag(self, clean_env):
        with pytest.raises(ConfigValidationError) as info:
            RunConfig.from_sources({'seed': float('inf')})
        assert info.value.key == 'seed'

    def test_backend_aliases_accepted(self):
        RunConfigFactory(backend='recursive-scan').validate()

    def test_smoothed_peakon_within_resolution(self):
        RunConfigFactory(profile='smoothed-peakon', moll_n=6).validate()

    def test_profile_params_carry_over(self):
        params = RunConfigFactory(amplitude=0.7, moll_n=5, seed=9).profile_params()
        assert (params.amplitude, params.moll_n, params.seed) == (0.7, 5, 9)


class TestManifestHash:
    """The hash covers the data-relevant keys and the code version."""

    def test_out_is_excluded(self):
        assert RunConfigFactory(out='/tmp/a').manifest_hash() == RunConfigFactory(out='/tmp/b').manifest_hash()

    def test_changes_with_physics(self):
        assert RunConfigFactory(t_end=0.2).manifest_hash() != RunConfigFactory(t_end=0.3).manifest_hash()

    def test_hex_digest(self):
        digest = RunConfigFactory().manifest_hash()
        assert len(digest) == 64
        int(digest, 16)


class TestStudyConfig:
    """Sweep configuration and per-point configs."""

    def setup_method(self):
        self.base = RunConfigFactory(out='/tmp/study')

    def test_point_config_sets_axis_and_directory(self):
        study = StudyConfig(self.base, 'time-step', (0.01, 0.02, 0.04))
        point = study.point_config(1)
        assert point.dt == 0.02
        assert point.out.endswith('point_01')
        assert point.t_end == self.base.t_end

    def test_finest_index(self):
        assert StudyConfig(self.base, 'time-step', (0.01, 0.02, 0.04)).finest_index() == 0
        assert StudyConfig(self.base, 'grid-resolution', (256, 512, 1024)).finest_index() == 2

    def test_parse_values(self):
        assert StudyConfig.parse_values('grid-resolution', '256, 512,1024') == (256, 512, 1024)
        assert StudyConfig.parse_values('time-step', '0.01,0.02,0.04') == (0.01, 0.02, 0.04)

    def test_parse_values_rejects_text(self):
        with pytest.raises(ConfigValidationError):
            StudyConfig.parse_values('mollification-index', '8,sixteen,32')

    @pytest.mark.parametrize('values', [(0.01, 0.02), (0.02, 0.01, 0.04), (0.01, 0.01, 0.02)])
    def test_bad_sweeps_rejected(self, values):
        with pytest.raises(ConfigValidationError) as info:
            StudyConfig(self.base, 'time-step', values).validate()
        assert info.value.key == 'sweep_values'

    def test_unknown_axis(self):
        with pytest.raises(ConfigValidationError) as info:
            StudyConfig(self.base, 'viscosity', (1.0, 2.0, 3.0)).validate()
        assert info.value.key == 'sweep_axis'

    def test_points_validated_up_front(self):
        base = RunConfigFactory(profile='smoothed-peakon')
        with pytest.raises(ConfigValidationError) as info:
            StudyConfig(base, 'mollification-index', (4, 8, 16)).validate()
        assert info.value.key == 'moll_n'

    def test_from_sources(self, clean_env, config_file):
        study = StudyConfig.from_sources(
            {'sweep_axis': 'time-step', 'sweep_values': '0.01,0.02,0.04', 'parallel': True},
            config_file,
        )
        assert study.values == (0.01, 0.02, 0.04)
        assert study.parallel is True
        assert study.base.grid_n == 256
