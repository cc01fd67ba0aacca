"""
Command-line entry points: run, study, diag and bench.

Flags default to None so that an omitted flag falls through to the
environment, then the --config file, then settings. Exit codes:
0 success, 1 failed assertion, 2 config or parse error, 3 blow-up.
"""
import argparse
import logging
import sys
from typing import Dict, List, Optional, Sequence, TextIO

from numerics.benchmarks import benchmark_backends
from numerics.exceptions import BackendError
from runs.run_config import RunConfig, StudyConfig
from runs.services.run_manager import EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK, execute_run
from runs.services.snapshot_checker import DIAG_CHECKS, check_snapshot
from runs.services.snapshot_store import read_snapshot
from runs.services.study_runner import execute_study
from runs.utils.validators import ConfigValidationError, SnapshotParseError

logger = logging.getLogger('runs')

DEFAULT_BENCH_SIZES = '4096,16384,65536'

# flag -> (RunConfig key, type)
RUN_FLAGS = (
    ('--domain-l', 'domain_l', float),
    ('--grid-n', 'grid_n', int),
    ('--t-end', 't_end', float),
    ('--dt', 'dt', float),
    ('--cfl', 'cfl', float),
    ('--max-dt', 'max_dt', float),
    ('--blowup-cap', 'blowup_cap', float),
    ('--profile', 'profile', str),
    ('--amplitude', 'amplitude', float),
    ('--width', 'width', float),
    ('--centre', 'centre', float),
    ('--separation', 'separation', float),
    ('--w-ratio', 'w_ratio', float),
    ('--moll-n', 'moll_n', int),
    ('--bumps', 'bumps', int),
    ('--seed', 'seed', int),
    ('--epsilon', 'epsilon', float),
    ('--backend', 'backend', str),
    ('--derivative-backend', 'derivative_backend', str),
    ('--stride', 'stride', int),
    ('--snapshot-format', 'snapshot_format', str),
    ('--snapshot-every', 'snapshot_every', int),
    ('--out', 'out', str),
)
RUN_SWITCHES = (
    ('--dealias', 'dealias', 'apply the 2/3 rule to every nonlinear product'),
    ('--strict-cfl', 'strict_cfl', 'abort instead of warning when dt exceeds the CFL limit'),
)


def _add_run_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument('--config', default=None, help='KEY=VALUE file of TRICAM_* settings')
    for flag, key, cast in RUN_FLAGS:
        parser.add_argument(flag, dest=key, type=cast, default=None)
    for flag, key, text in RUN_SWITCHES:
        parser.add_argument(flag, dest=key, action='store_const', const=True, default=None, help=text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='tricam',
        description='Solver and verification lab for the v=0 sector of the three-component CH system.',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    run = sub.add_parser('run', help='evolve one configuration and write its artifacts')
    _add_run_arguments(run)

    study = sub.add_parser('study', help='sweep one axis and judge convergence and invariants')
    _add_run_arguments(study)
    study.add_argument('--sweep-axis', dest='sweep_axis', default=None,
                       help='mollification-index | grid-resolution | time-step')
    study.add_argument('--sweep-values', dest='sweep_values', default=None,
                       help='comma separated, strictly increasing, at least 3')
    study.add_argument('--parallel', dest='parallel', action='store_const', const=True, default=None)
    study.add_argument('--workers', dest='workers', type=int, default=None)

    diag = sub.add_parser('diag', help='re-verify a stored snapshot')
    diag.add_argument('snapshot', help='snapshot file (.csv or .tcs)')
    diag.add_argument('--checks', default=','.join(DIAG_CHECKS),
                      help=f'comma separated subset of {",".join(DIAG_CHECKS)}')

    bench = sub.add_parser('bench', help='time the convolution backends')
    bench.add_argument('--sizes', default=DEFAULT_BENCH_SIZES)
    bench.add_argument('--repeats', type=int, default=5)
    bench.add_argument('--backends', default='scan,fourier')
    return parser


def _flags(args: argparse.Namespace, keys: Sequence[str]) -> Dict[str, object]:
    return {key: getattr(args, key) for key in keys if getattr(args, key, None) is not None}


def _run_keys() -> List[str]:
    return [key for _, key, _ in RUN_FLAGS] + [key for _, key, _ in RUN_SWITCHES]


def cmd_run(args: argparse.Namespace, out: TextIO) -> int:
    config = RunConfig.from_sources(_flags(args, _run_keys()), args.config)
    result = execute_run(config)
    if result.message:
        out.write(result.message + '\n')
    out.write(f'status={result.status} rows={len(result.records)} steps={result.steps} '
              f'out={result.out_dir}\n')
    return result.exit_code


def cmd_study(args: argparse.Namespace, out: TextIO) -> int:
    keys = _run_keys() + ['sweep_axis', 'sweep_values', 'parallel', 'workers']
    study = StudyConfig.from_sources(_flags(args, keys), args.config)
    report = execute_study(study)
    for point in report.points:
        out.write(f'point={point.index} value={point.value:g} status={point.status}\n')
    for verdict in report.verdicts:
        out.write(f'verdict={verdict.name} measured={verdict.measured:.6e} '
                  f'tolerance={verdict.tolerance:.6e} status={"PASS" if verdict.passed else "FAIL"}\n')
    return report.exit_code


def cmd_diag(args: argparse.Namespace, out: TextIO) -> int:
    checks = [name.strip() for name in args.checks.split(',') if name.strip()]
    data = read_snapshot(args.snapshot)
    results = check_snapshot(data, checks)
    for result in results:
        out.write(result.line() + '\n')
    return EXIT_OK if all(r.passed for r in results) else EXIT_ASSERTION


def cmd_bench(args: argparse.Namespace, out: TextIO) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(',') if s.strip()]
    except ValueError:
        raise ConfigValidationError('sizes', args.sizes, 'expected comma separated integers') from None
    backends = [b.strip() for b in args.backends.split(',') if b.strip()]
    try:
        timings = benchmark_backends(sizes, backends, args.repeats)
    except BackendError as exc:
        raise ConfigValidationError('backends', args.backends, str(exc)) from None
    for name, timing in timings.items():
        for n, seconds in zip(timing.sizes, timing.seconds):
            out.write(f'backend={name} n={n} seconds={seconds:.6e}\n')
        growth = ','.join(f'{g:.3f}' for g in timing.growth_per_doubling())
        out.write(f'backend={name} growth_per_doubling={growth}\n')
    return EXIT_OK


COMMANDS = {
    'run': cmd_run,
    'study': cmd_study,
    'diag': cmd_diag,
    'bench': cmd_bench,
}


def main(argv: Optional[Sequence[str]] = None, out: Optional[TextIO] = None,
         err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except ConfigValidationError as exc:
        err.write(str(exc) + '\n')
        return EXIT_CONFIG
    except SnapshotParseError as exc:
        err.write(f'parse-error {exc}\n')
        return EXIT_CONFIG
