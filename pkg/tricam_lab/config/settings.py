"""
Settings for the TriCam verification lab.

Pulls every default out of environment variables (or a .env file)
through decouple, so a run can be retuned without touching code
and nothing machine specific ends up in version control.
"""
from pathlib import Path

from decouple import config, Csv

# Build paths relative to the project root
BASE_DIR = Path(__file__).resolve().parent.parent

VERSION = '1.0.0'

# Where run artifacts land when --out is not given
OUTPUT_ROOT = config('TRICAM_OUT', default=str(BASE_DIR.parent / 'runs_output'))

# Default grid: [-L, L) with periodic wrap, e^{-L} keeps image error tiny
DEFAULT_DOMAIN_L = config('TRICAM_DOMAIN_L', default=20.0, cast=float)
DEFAULT_GRID_N = config('TRICAM_GRID_N', default=1024, cast=int)
MIN_GRID_N = 16

# Time stepping
DEFAULT_T_END = config('TRICAM_T_END', default=5.0, cast=float)
DEFAULT_CFL = config('TRICAM_CFL', default=0.3, cast=float)
# absolute step cap and fewest steps per run when dt is chosen automatically
MAX_DT = config('TRICAM_MAX_DT', default=0.01, cast=float)
MIN_STEPS = config('TRICAM_MIN_STEPS', default=20, cast=int)
STRICT_CFL = config('TRICAM_STRICT_CFL', default=False, cast=bool)
BLOWUP_CAP = config('TRICAM_BLOWUP_CAP', default=1e6, cast=float)
DEFAULT_STRIDE = config('TRICAM_STRIDE', default=10, cast=int)

# Kernel backends
DEFAULT_BACKEND = config('TRICAM_BACKEND', default='fourier')
DEFAULT_DERIVATIVE_BACKEND = config('TRICAM_DERIVATIVE_BACKEND', default='spectral')
SCAN_STENCIL = config('TRICAM_SCAN_STENCIL', default=6, cast=int)
ORACLE_MAX_NODES = config('TRICAM_ORACLE_MAX_NODES', default=8192, cast=int)

# Initial data
DEFAULT_PROFILE = config('TRICAM_PROFILE', default='smoothed-peakon')
DEFAULT_MOLL_N = config('TRICAM_MOLL_N', default=4, cast=int)
DEFAULT_EPSILON = config('TRICAM_EPSILON', default=1.0, cast=float)
MOLLIFIER_MIN_POINTS = 8

# Acceptance tolerances for the invariant checks
H1_DRIFT_TOL = config('TRICAM_H1_DRIFT_TOL', default=1e-6, cast=float)
H2_DRIFT_TOL = config('TRICAM_H2_DRIFT_TOL', default=1e-6, cast=float)
H2_GAP_TOL = config('TRICAM_H2_GAP_TOL', default=1e-8, cast=float)
SIGN_TOL = config('TRICAM_SIGN_TOL', default=1e-6, cast=float)
SLOPE_TOL = config('TRICAM_SLOPE_TOL', default=1e-6, cast=float)
L1_IDENTITY_TOL = config('TRICAM_L1_IDENTITY_TOL', default=1e-8, cast=float)
ELLIPTIC_TOL = config('TRICAM_ELLIPTIC_TOL', default=1e-8, cast=float)
CONSTITUTIVE_TOL = config('TRICAM_CONSTITUTIVE_TOL', default=1e-8, cast=float)
TV_BOUND_FACTOR = config('TRICAM_TV_BOUND_FACTOR', default=2.0, cast=float)

# Studies and seeded profiles
DEFAULT_MOLL_SWEEP = config('TRICAM_MOLL_SWEEP', default='8,16,32,64', cast=Csv(int))
DEFAULT_SEED = config('TRICAM_SEED', default=0, cast=int)
STUDY_WORKERS = config('TRICAM_STUDY_WORKERS', default=4, cast=int)

# Snapshot output: 'csv' or the packed 'tcs' format; every k-th sample, 0 = final only
SNAPSHOT_FORMAT = config('TRICAM_SNAPSHOT_FORMAT', default='csv')
SNAPSHOT_EVERY = config('TRICAM_SNAPSHOT_EVERY', default=0, cast=int)

# Logging config
LOG_DIR = config('TRICAM_LOG_DIR', default='')
LOG_LEVEL = config('TRICAM_LOG_LEVEL', default='INFO')

_handlers = ['console']
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'level': 'DEBUG',
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'loggers': {},
}

if LOG_DIR:
    LOGGING['handlers']['file'] = {
        'level': 'INFO',
        'class': 'logging.FileHandler',
        'filename': str(Path(LOG_DIR) / 'tricam.log'),
        'formatter': 'verbose',
    }
    _handlers.append('file')

for _name in ('numerics', 'solver', 'diagnostics', 'runs'):
    LOGGING['loggers'][_name] = {
        'handlers': _handlers,
        'level': LOG_LEVEL,
        'propagate': True,
    }
