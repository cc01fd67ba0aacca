"""
Snapshot files.

Two formats hold the same six columns x, a, c, b, u, w:

- csv: comment lines `# t=`, `# manifest-sha256=`, `# domain=x_min,x_max`
  and the `# backend=`, `# derivative-backend=`, `# dealias=` the fields
  were computed with, then the header row and one row per grid node
  (17 significant digits).
- tcs: packed little-endian. Magic b'TRICAMS1', uint32 n, float64 t,
  x_min and x_max, then the six float64 arrays one after another.

The format is picked from the file suffix. A snapshot without backend
lines (every tcs file) takes them from the manifest.json of its run
directory when there is one.
"""
import csv
import json
import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Union

import numpy as np

from config import settings
from diagnostics.records import format_value
from dynamics.services.rhs_assembler import RhsAssembler, default_assembler
from dynamics.state import Snapshot, State
from numerics.exceptions import TricamError
from numerics.field import DERIVATIVE_BACKENDS, Field, Grid1D, make_grid
from numerics.kernels import KernelBackend
from runs.utils.validators import SnapshotParseError

logger = logging.getLogger('runs')

SNAPSHOT_COLUMNS = ('x', 'a', 'c', 'b', 'u', 'w')
TCS_MAGIC = b'TRICAMS1'
TCS_HEADER = struct.Struct('<8sIddd')
MANIFEST_FILE = 'manifest.json'

PathLike = Union[str, Path]


@dataclass
class SnapshotData:
    """Stored fields of one snapshot plus the metadata needed to rebuild its grid."""

    t: float
    x_min: float
    x_max: float
    columns: Dict[str, np.ndarray]
    manifest_hash: Optional[str] = None
    backend: Optional[str] = None
    derivative_backend: Optional[str] = None
    dealias: bool = False

    @property
    def n(self) -> int:
        return len(self.columns['x'])

    @property
    def has_backend(self) -> bool:
        return self.backend is not None or self.derivative_backend is not None

    def grid(self) -> Grid1D:
        try:
            return make_grid(self.x_min, self.x_max, self.n)
        except TricamError as exc:
            raise SnapshotParseError(f'cannot rebuild the grid ({exc})') from exc

    def state(self) -> State:
        grid = self.grid()
        return State(self.t, Field(grid, self.columns['a']), Field(grid, self.columns['c']))

    def snapshot(self) -> Snapshot:
        return Snapshot(self.state(), Field(self.grid(), self.columns['b']))

    def assembler(self) -> RhsAssembler:
        """Assembler matching the recorded backends; the default one when none are recorded."""
        if not self.has_backend:
            return default_assembler()
        return RhsAssembler(self.backend, self.derivative_backend, self.dealias)

    def set_backend(self, backend, derivative_backend, dealias, source) -> None:
        """Validate and store backend metadata read from `source`."""
        try:
            tag = KernelBackend.parse(backend or settings.DEFAULT_BACKEND).value
        except TricamError as exc:
            raise SnapshotParseError(f'{source}: {exc}') from exc
        derivative = derivative_backend or settings.DEFAULT_DERIVATIVE_BACKEND
        if derivative not in DERIVATIVE_BACKENDS:
            raise SnapshotParseError(f'{source}: unknown derivative backend {derivative!r}')
        self.backend = tag
        self.derivative_backend = derivative
        self.dealias = _as_bool(dealias)

    @classmethod
    def from_snapshot(cls, snapshot: Snapshot, u: np.ndarray, w: np.ndarray,
                      manifest_hash: Optional[str] = None,
                      assembler: Optional[RhsAssembler] = None) -> 'SnapshotData':
        state = snapshot.state
        grid = state.grid
        data = cls(
            t=state.t,
            x_min=grid.x_min,
            x_max=grid.x_max,
            columns={
                'x': grid.x,
                'a': state.a.values,
                'c': state.c.values,
                'b': snapshot.b.values,
                'u': np.asarray(u, dtype=float),
                'w': np.asarray(w, dtype=float),
            },
            manifest_hash=manifest_hash,
        )
        if assembler is not None:
            data.backend = assembler.backend.tag.value
            data.derivative_backend = assembler.derivative_backend
            data.dealias = bool(assembler.dealias)
        return data


def _as_bool(value) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in ('1', 'true', 'yes', 'on')
    return bool(value)


def _check_rows(path: PathLike, n: int) -> None:
    if n < settings.MIN_GRID_N:
        raise SnapshotParseError(f'{path}: needs at least {settings.MIN_GRID_N} grid rows, got {n}')


def snapshot_filename(index: int, fmt: str) -> str:
    return f'snapshot_{index:04d}.{fmt}'


def write_csv(path: PathLike, data: SnapshotData) -> None:
    with open(path, 'w', newline='') as handle:
        handle.write(f'# t={format_value(data.t)}\n')
        if data.manifest_hash:
            handle.write(f'# manifest-sha256={data.manifest_hash}\n')
        handle.write(f'# domain={format_value(data.x_min)},{format_value(data.x_max)}\n')
        if data.has_backend:
            handle.write(f'# backend={data.backend}\n')
            handle.write(f'# derivative-backend={data.derivative_backend}\n')
            handle.write(f'# dealias={int(data.dealias)}\n')
        writer = csv.writer(handle, lineterminator='\n')
        writer.writerow(SNAPSHOT_COLUMNS)
        stacked = np.column_stack([data.columns[name] for name in SNAPSHOT_COLUMNS])
        for row in stacked:
            writer.writerow([format_value(v) for v in row])


def _parse_comment(line: str, meta: Dict[str, str]) -> None:
    body = line[1:].strip()
    if '=' in body:
        key, value = body.split('=', 1)
        meta[key.strip()] = value.strip()


def read_csv(path: PathLike) -> SnapshotData:
    meta: Dict[str, str] = {}
    rows = []
    header = None
    try:
        with open(path, newline='') as handle:
            for line in handle:
                if line.startswith('#'):
                    _parse_comment(line, meta)
                    continue
                if not line.strip():
                    continue
                cells = next(csv.reader([line]))
                if header is None:
                    header = [cell.strip() for cell in cells]
                    continue
                rows.append([float(cell) for cell in cells])
    except ValueError as exc:
        raise SnapshotParseError(f'{path}: non-numeric value ({exc})') from exc

    if header is None or tuple(header) != SNAPSHOT_COLUMNS:
        raise SnapshotParseError(f'{path}: expected header {",".join(SNAPSHOT_COLUMNS)}, got {header}')
    if 't' not in meta:
        raise SnapshotParseError(f'{path}: missing "# t=" line')
    _check_rows(path, len(rows))
    if any(len(row) != len(SNAPSHOT_COLUMNS) for row in rows):
        raise SnapshotParseError(f'{path}: ragged rows')

    table = np.array(rows)
    columns = {name: table[:, i].copy() for i, name in enumerate(SNAPSHOT_COLUMNS)}
    try:
        t = float(meta['t'])
        if 'domain' in meta:
            x_min, x_max = (float(v) for v in meta['domain'].split(','))
        else:
            # grid spacing recovered from the x column
            dx = columns['x'][1] - columns['x'][0]
            x_min, x_max = columns['x'][0], columns['x'][0] + dx * len(rows)
    except ValueError as exc:
        raise SnapshotParseError(f'{path}: bad metadata ({exc})') from exc
    data = SnapshotData(t, float(x_min), float(x_max), columns, meta.get('manifest-sha256'))
    if 'backend' in meta or 'derivative-backend' in meta:
        data.set_backend(meta.get('backend'), meta.get('derivative-backend'), meta.get('dealias', '0'), path)
    return data


def write_tcs(path: PathLike, data: SnapshotData) -> None:
    n = data.n
    with open(path, 'wb') as handle:
        handle.write(TCS_HEADER.pack(TCS_MAGIC, n, data.t, data.x_min, data.x_max))
        for name in SNAPSHOT_COLUMNS:
            handle.write(np.ascontiguousarray(data.columns[name], dtype='<f8').tobytes())


def read_tcs(path: PathLike) -> SnapshotData:
    raw = Path(path).read_bytes()
    if len(raw) < TCS_HEADER.size:
        raise SnapshotParseError(f'{path}: truncated header')
    magic, n, t, x_min, x_max = TCS_HEADER.unpack_from(raw)
    if magic != TCS_MAGIC:
        raise SnapshotParseError(f'{path}: bad magic {magic!r}')
    expected = TCS_HEADER.size + len(SNAPSHOT_COLUMNS) * n * 8
    if len(raw) != expected:
        raise SnapshotParseError(f'{path}: expected {expected} bytes for n={n}, got {len(raw)}')
    _check_rows(path, n)
    body = np.frombuffer(raw, dtype='<f8', offset=TCS_HEADER.size).reshape(len(SNAPSHOT_COLUMNS), n)
    columns = {name: body[i].astype(float) for i, name in enumerate(SNAPSHOT_COLUMNS)}
    return SnapshotData(float(t), float(x_min), float(x_max), columns)


def backend_from_manifest(path: Path, data: SnapshotData) -> None:
    """Fill missing backend metadata from the run manifest next to the snapshot."""
    manifest_path = path.parent / MANIFEST_FILE
    if data.has_backend or not manifest_path.is_file():
        return
    try:
        manifest = json.loads(manifest_path.read_text())
        config = manifest['config']
    except (ValueError, KeyError, TypeError) as exc:
        raise SnapshotParseError(f'{manifest_path}: unreadable manifest ({exc})') from exc
    if data.manifest_hash and manifest.get('manifest_sha256') not in (None, data.manifest_hash):
        logger.warning('Snapshot %s does not belong to %s; backends left at defaults', path, manifest_path)
        return
    data.set_backend(config.get('backend'), config.get('derivative_backend'),
                     config.get('dealias', False), manifest_path)


_WRITERS = {'.csv': write_csv, '.tcs': write_tcs}
_READERS = {'.csv': read_csv, '.tcs': read_tcs}


def write_snapshot(path: PathLike, data: SnapshotData) -> Path:
    path = Path(path)
    writer = _WRITERS.get(path.suffix)
    if writer is None:
        raise SnapshotParseError(f'Unknown snapshot format {path.suffix!r}')
    writer(path, data)
    logger.debug('Wrote snapshot t=%.6f to %s', data.t, path)
    return path


def read_snapshot(path: PathLike) -> SnapshotData:
    path = Path(path)
    reader = _READERS.get(path.suffix)
    if reader is None:
        raise SnapshotParseError(f'{path}: unknown snapshot format {path.suffix!r}')
    if not path.is_file():
        raise SnapshotParseError(f'{path}: no such file')
    data = reader(path)
    backend_from_manifest(path, data)
    return data
