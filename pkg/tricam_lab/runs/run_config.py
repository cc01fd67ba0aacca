"""
Run and study configuration.

A value is taken from, in order: the command-line flag, the
environment (TRICAM_<KEY>), the config file given with --config (same
TRICAM_<KEY>=value lines, # comments allowed) and finally the default
in settings. Both config classes validate themselves before any grid
or field is built.
"""
import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

from decouple import Config, RepositoryEmpty, RepositoryEnv

from config import settings
from initdata.services.mollifier import max_resolvable_index
from initdata.services.profiles import PROFILES, ProfileParams
from numerics.exceptions import BackendError
from numerics.field import DERIVATIVE_BACKENDS, Grid1D, make_grid
from numerics.kernels import KernelBackend
from runs.utils.validators import (
    SNAPSHOT_FORMATS,
    SWEEP_AXES,
    ConfigValidationError,
    validate_choice,
    validate_finite,
    validate_int_at_least,
    validate_non_negative,
    validate_positive,
    validate_sweep_values,
)

logger = logging.getLogger('runs')

ENV_PREFIX = 'TRICAM_'

_PROFILE_DEFAULTS = ProfileParams()


def optional_float(value) -> Optional[float]:
    if value is None or str(value).strip().lower() in ('', 'none', 'auto'):
        return None
    return float(value)


def env_name(key: str) -> str:
    return ENV_PREFIX + key.upper()


def load_source(path: Optional[str] = None) -> Config:
    """decouple Config over the environment, backed by a key-value file when given."""
    if path is None:
        return Config(RepositoryEmpty())
    if not Path(path).is_file():
        raise ConfigValidationError('config', path, 'file not found')
    return Config(RepositoryEnv(str(path)))


def resolve_value(source: Config, key: str, flag_value, default, cast):
    """Flag beats environment beats file beats default."""
    if flag_value is not None:
        return flag_value
    try:
        return source(env_name(key), default=default, cast=cast)
    except ValueError:
        raw = source(env_name(key), default=default)
        raise ConfigValidationError(key, raw, f'cannot be read as {getattr(cast, "__name__", cast)}') from None


@dataclass(frozen=True)
class RunConfig:
    """Everything one run needs; `out` is the only key left out of the manifest hash."""

    domain_l: float = settings.DEFAULT_DOMAIN_L
    grid_n: int = settings.DEFAULT_GRID_N
    t_end: float = settings.DEFAULT_T_END
    dt: Optional[float] = None
    cfl: float = settings.DEFAULT_CFL
    max_dt: float = settings.MAX_DT
    strict_cfl: bool = settings.STRICT_CFL
    blowup_cap: float = settings.BLOWUP_CAP
    profile: str = settings.DEFAULT_PROFILE
    amplitude: float = _PROFILE_DEFAULTS.amplitude
    width: float = _PROFILE_DEFAULTS.width
    centre: float = _PROFILE_DEFAULTS.centre
    separation: float = _PROFILE_DEFAULTS.separation
    w_ratio: float = _PROFILE_DEFAULTS.w_ratio
    moll_n: int = settings.DEFAULT_MOLL_N
    bumps: int = _PROFILE_DEFAULTS.bumps
    seed: int = settings.DEFAULT_SEED
    epsilon: float = settings.DEFAULT_EPSILON
    backend: str = settings.DEFAULT_BACKEND
    derivative_backend: str = settings.DEFAULT_DERIVATIVE_BACKEND
    dealias: bool = False
    stride: int = settings.DEFAULT_STRIDE
    snapshot_format: str = settings.SNAPSHOT_FORMAT
    snapshot_every: int = settings.SNAPSHOT_EVERY
    out: str = settings.OUTPUT_ROOT

    CASTS = {
        'domain_l': float, 'grid_n': int, 't_end': float, 'dt': optional_float,
        'cfl': float, 'max_dt': float, 'strict_cfl': bool, 'blowup_cap': float, 'profile': str,
        'amplitude': float, 'width': float, 'centre': float, 'separation': float,
        'w_ratio': float, 'moll_n': int, 'bumps': int, 'seed': int,
        'epsilon': float, 'backend': str, 'derivative_backend': str, 'dealias': bool,
        'stride': int, 'snapshot_format': str, 'snapshot_every': int, 'out': str,
    }

    @classmethod
    def from_sources(cls, flags: Optional[Mapping[str, Any]] = None,
                     path: Optional[str] = None) -> 'RunConfig':
        flags = flags or {}
        source = load_source(path)
        values = {}
        for f in fields(cls):
            values[f.name] = resolve_value(source, f.name, flags.get(f.name), f.default, cls.CASTS[f.name])
        config = cls(**values)
        config.validate()
        return config

    def validate(self) -> None:
        validate_positive('domain_l', self.domain_l)
        validate_int_at_least('grid_n', self.grid_n, settings.MIN_GRID_N)
        validate_finite('t_end', self.t_end)
        if self.dt is not None:
            validate_positive('dt', self.dt)
        validate_positive('cfl', self.cfl)
        validate_positive('max_dt', self.max_dt)
        validate_positive('blowup_cap', self.blowup_cap)
        validate_choice('profile', self.profile, PROFILES)
        validate_non_negative('amplitude', self.amplitude)
        validate_positive('width', self.width)
        validate_non_negative('separation', self.separation)
        validate_non_negative('w_ratio', self.w_ratio)
        validate_finite('centre', self.centre)
        validate_int_at_least('moll_n', self.moll_n, 1)
        validate_int_at_least('bumps', self.bumps, 1)
        validate_int_at_least('seed', self.seed, 0)
        validate_positive('epsilon', self.epsilon)
        try:
            KernelBackend.parse(self.backend)
        except BackendError:
            raise ConfigValidationError('backend', self.backend, 'unknown kernel backend') from None
        validate_choice('derivative_backend', self.derivative_backend, DERIVATIVE_BACKENDS)
        validate_int_at_least('stride', self.stride, 1)
        validate_choice('snapshot_format', self.snapshot_format, SNAPSHOT_FORMATS)
        validate_int_at_least('snapshot_every', self.snapshot_every, 0)
        if not str(self.out).strip():
            raise ConfigValidationError('out', self.out, 'must name a directory')
        self._validate_profile()

    def _validate_profile(self) -> None:
        left = self.centre - 0.5 * self.separation
        right = self.centre + 0.5 * self.separation
        if not (-self.domain_l <= left and right < self.domain_l):
            raise ConfigValidationError('separation', self.separation,
                                        f'profile centres {left:g}, {right:g} leave the domain')
        if self.profile == 'two-bump' and self.separation < 2.0 * self.width:
            raise ConfigValidationError('separation', self.separation, 'two-bump supports overlap')
        if self.profile == 'smoothed-peakon':
            limit = max_resolvable_index(self.grid())
            if self.moll_n > limit:
                raise ConfigValidationError('moll_n', self.moll_n,
                                            f'mollifier under-resolved on this grid (max {limit})')

    def grid(self) -> Grid1D:
        return make_grid(-self.domain_l, self.domain_l, self.grid_n)

    def profile_params(self) -> ProfileParams:
        return ProfileParams(
            amplitude=self.amplitude,
            width=self.width,
            centre=self.centre,
            separation=self.separation,
            w_ratio=self.w_ratio,
            moll_n=self.moll_n,
            seed=self.seed,
            bumps=self.bumps,
        )

    def with_changes(self, **changes) -> 'RunConfig':
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def manifest_hash(self) -> str:
        """sha256 of the canonical JSON of every data-relevant key plus the code version."""
        payload = {k: v for k, v in self.to_dict().items() if k != 'out'}
        payload['version'] = settings.VERSION
        text = json.dumps(payload, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(text.encode('utf-8')).hexdigest()


@dataclass(frozen=True)
class StudyConfig:
    """A base run swept along one axis."""

    base: RunConfig
    axis: str
    values: Tuple[float, ...] = field(default_factory=tuple)
    parallel: bool = False
    workers: int = settings.STUDY_WORKERS

    AXIS_KEYS = {
        'mollification-index': 'moll_n',
        'grid-resolution': 'grid_n',
        'time-step': 'dt',
    }

    @classmethod
    def from_sources(cls, flags: Optional[Mapping[str, Any]] = None,
                     path: Optional[str] = None) -> 'StudyConfig':
        flags = dict(flags or {})
        source = load_source(path)
        axis = resolve_value(source, 'sweep_axis', flags.pop('sweep_axis', None),
                             'mollification-index', str)
        default_values = ','.join(str(v) for v in settings.DEFAULT_MOLL_SWEEP)
        raw_values = resolve_value(source, 'sweep_values', flags.pop('sweep_values', None),
                                   default_values, str)
        parallel = resolve_value(source, 'parallel', flags.pop('parallel', None), False, bool)
        workers = resolve_value(source, 'study_workers', flags.pop('workers', None),
                                settings.STUDY_WORKERS, int)
        validate_choice('sweep_axis', axis, SWEEP_AXES)
        values = cls.parse_values(axis, raw_values)
        study = cls(base=RunConfig.from_sources(flags, path), axis=axis, values=values,
                    parallel=parallel, workers=workers)
        study.validate()
        return study

    @staticmethod
    def parse_values(axis: str, raw) -> Tuple[float, ...]:
        if isinstance(raw, str):
            items = [item.strip() for item in raw.split(',') if item.strip()]
        else:
            items = list(raw)
        cast = float if axis == 'time-step' else int
        try:
            return tuple(cast(item) for item in items)
        except ValueError:
            raise ConfigValidationError('sweep_values', raw, f'expected {cast.__name__} values') from None

    def validate(self) -> None:
        validate_choice('sweep_axis', self.axis, SWEEP_AXES)
        validate_sweep_values('sweep_values', self.values)
        validate_int_at_least('workers', self.workers, 1)
        for index in range(len(self.values)):
            self.point_config(index).validate()

    @property
    def key(self) -> str:
        return self.AXIS_KEYS[self.axis]

    def finest_index(self) -> int:
        """The smallest dt, or the largest index or resolution."""
        return 0 if self.axis == 'time-step' else len(self.values) - 1

    def point_config(self, index: int) -> RunConfig:
        value = self.values[index]
        out = str(Path(self.base.out) / f'point_{index:02d}')
        return self.base.with_changes(**{self.key: value, 'out': out})
