"""
Validators for run and study configuration.

Every check raises ConfigValidationError naming the offending key, so
the command line can print one machine-readable line and exit 2
before anything is allocated.
"""
import math
import numbers
from typing import Iterable, Sequence

from numerics.exceptions import TricamError

SWEEP_AXES = ('mollification-index', 'grid-resolution', 'time-step')
SNAPSHOT_FORMATS = ('csv', 'tcs')
MIN_SWEEP_POINTS = 3


class ConfigValidationError(TricamError):
    """A configuration value is missing, malformed or out of range."""

    def __init__(self, key: str, value, reason: str) -> None:
        self.key = key
        self.value = value
        self.reason = reason
        super().__init__(str(self))

    def __str__(self) -> str:
        return f'config-error key={self.key} value={self.value} reason={self.reason}'


class SnapshotParseError(TricamError):
    """A stored snapshot file could not be read back."""


def validate_positive(key: str, value: float) -> None:
    if value is None or not math.isfinite(value) or value <= 0:
        raise ConfigValidationError(key, value, 'must be a finite number > 0')


def validate_non_negative(key: str, value: float) -> None:
    if value is None or not math.isfinite(value) or value < 0:
        raise ConfigValidationError(key, value, 'must be a finite number >= 0')


def validate_finite(key: str, value: float) -> None:
    if value is None or not math.isfinite(value):
        raise ConfigValidationError(key, value, 'must be finite')


def validate_int_at_least(key: str, value, minimum: int) -> None:
    if (value is None or isinstance(value, bool) or not isinstance(value, numbers.Real)
            or not math.isfinite(value) or int(value) != value or value < minimum):
        raise ConfigValidationError(key, value, f'must be an integer >= {minimum}')


def validate_choice(key: str, value, choices: Iterable) -> None:
    choices = tuple(choices)
    if value not in choices:
        raise ConfigValidationError(key, value, f'must be one of {"|".join(map(str, choices))}')


def validate_sweep_values(key: str, values: Sequence[float]) -> None:
    """Sweeps need at least three strictly increasing values to estimate a rate."""
    if len(values) < MIN_SWEEP_POINTS:
        raise ConfigValidationError(key, ','.join(map(str, values)),
                                    f'needs at least {MIN_SWEEP_POINTS} values')
    for left, right in zip(values, values[1:]):
        if not right > left:
            raise ConfigValidationError(key, ','.join(map(str, values)), 'must be strictly increasing')
