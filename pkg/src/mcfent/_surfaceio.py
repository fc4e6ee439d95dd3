""" _surfaceio.py - surface files, trace CSV files and snapshot directories

A surface file is line oriented:

    # comment
    format = mcfent-surface 1
    kind = revolution
    topology = axis
    name = sphere
    meta.t = 0.25
    vertices = 3
    0 1.41421356237
    1.41421356237 0
    0 -1.41421356237

Analytic descriptors (kind = analytic) carry `shape`, `dimension`,
`radius`, `k`, `m` and `tube` entries and no vertex block.
"""

import csv
import dataclasses
import logging
import os
from typing import Dict, List, Optional, TextIO, Union

import numpy as np

from ._config import FlowParams
from ._errors import DomainError
from ._flow import FlowKind, FlowSample, FlowTrace, StopReason, diagnose
from ._geometry import DiscreteCurve, ProfileSurface, Topology
from ._shrinkers import AnalyticShape, ShapeKind


__all__ = (
    'SurfaceRecord',
    'format_number',
    'dumps_surface',
    'loads_surface',
    'write_surface',
    'read_surface',
    'TRACE_COLUMNS',
    'write_trace_csv',
    'read_trace_csv',
    'write_snapshots',
    'read_snapshots',
)


logger = logging.getLogger(__name__)


FORMAT_TAG = 'mcfent-surface 1'

TRACE_COLUMNS = (
    't', 'F01', 'entropy_lb', 'min_phi', 'max_A', 'max_B2', 'n_vertices',
    'mesh_quality', 'min_H', 'h_max', 'resolved',
)

_DIAGNOSTIC_FIELDS = (
    'f01', 'entropy_lb', 'min_phi', 'max_a', 'max_b2', 'n_vertices',
    'mesh_ratio', 'min_mean', 'h_max', 'resolved',
)

SNAPSHOT_PATTERN = 'snapshot_{:05d}.surf'


@dataclasses.dataclass
class SurfaceRecord:
    surface: object
    name: str = ''
    provenance: str = ''
    meta: Dict[str, str] = dataclasses.field(default_factory=dict)


def format_number(value) -> str:
    return f'{float(value):.12g}'


def _header(surface) -> List[str]:
    if isinstance(surface, DiscreteCurve):
        return ['kind = curve',
                f'immersed = {str(surface.immersed).lower()}']
    if isinstance(surface, ProfileSurface):
        return ['kind = revolution',
                f'topology = {surface.topology.value}']
    if isinstance(surface, AnalyticShape):
        lines = ['kind = analytic', f'shape = {surface.kind.value}',
                 f'dimension = {surface.dimension}']
        for key in ('radius', 'tube'):
            value = getattr(surface, key)
            if value is not None:
                lines.append(f'{key} = {format_number(value)}')
        for key in ('k', 'm'):
            value = getattr(surface, key)
            if value is not None:
                lines.append(f'{key} = {value}')
        lines.append(f'shrinker = {str(surface.shrinker).lower()}')
        return lines
    raise DomainError(f'cannot write {type(surface).__name__!r} objects')


def dumps_surface(surface, name: str = '', provenance: str = '',
                  meta: Optional[Dict[str, object]] = None) -> str:
    lines = [f'format = {FORMAT_TAG}'] + _header(surface)
    if name:
        lines.append(f'name = {name}')
    if provenance:
        lines.append(f'provenance = {provenance}')
    for key, value in (meta or {}).items():
        if isinstance(value, float):
            value = format_number(value)
        lines.append(f'meta.{key} = {value}')
    if not isinstance(surface, AnalyticShape):
        pts = surface.points
        lines.append(f'vertices = {len(pts)}')
        lines.extend(f'{format_number(x)} {format_number(y)}'
                     for x, y in pts)
    return '\n'.join(lines) + '\n'


def _flag(value: str, where: str) -> bool:
    if value.lower() in ('true', 'yes', '1'):
        return True
    if value.lower() in ('false', 'no', '0'):
        return False
    raise DomainError(f'{where}: expected true or false, got {value!r}')


def _analytic(header: Dict[str, str], where: str) -> AnalyticShape:
    try:
        kind = ShapeKind(header['shape'])
        dimension = int(header['dimension'])
        radius = float(header['radius']) if 'radius' in header else None
        k = int(header['k']) if 'k' in header else None
        m = int(header['m']) if 'm' in header else None
        tube = float(header['tube']) if 'tube' in header else None
    except KeyError as exc:
        raise DomainError(f'{where}: missing entry {exc.args[0]!r}') from None
    except ValueError as exc:
        raise DomainError(f'{where}: {exc}') from None
    shrinker = _flag(header.get('shrinker', 'false'), where)
    return AnalyticShape(kind, dimension, radius=radius, k=k, m=m,
                         tube=tube, shrinker=shrinker)


def loads_surface(text: str, source: str = '<string>') -> SurfaceRecord:
    """Parse the surface format.  Malformed files raise DomainError;
    vertex data violating the surface invariants raise MeshError."""
    header: Dict[str, str] = {}
    meta: Dict[str, str] = {}
    rows: List[List[float]] = []
    expected = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        where = f'{source}:{lineno}'
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if expected is not None:
            parts = line.split()
            if len(parts) != 2:
                raise DomainError(f'{where}: expected two coordinates')
            try:
                rows.append([float(parts[0]), float(parts[1])])
            except ValueError:
                raise DomainError(f'{where}: bad coordinate in {line!r}'
                                  ) from None
            continue
        key, sep, value = line.partition('=')
        if not sep:
            raise DomainError(f'{where}: expected key = value')
        key, value = key.strip(), value.strip()
        if key == 'vertices':
            try:
                expected = int(value)
            except ValueError:
                raise DomainError(f'{where}: bad vertex count {value!r}'
                                  ) from None
        elif key.startswith('meta.'):
            meta[key[5:]] = value
        else:
            header[key] = value

    if header.get('format') != FORMAT_TAG:
        raise DomainError(f'{source}: not a {FORMAT_TAG} file')
    kind = header.get('kind')
    if kind == 'analytic':
        surface = _analytic(header, source)
    else:
        if expected is None:
            raise DomainError(f'{source}: missing vertices block')
        if len(rows) != expected:
            raise DomainError(f'{source}: expected {expected} vertices, '
                              f'found {len(rows)}')
        pts = np.array(rows, dtype=float).reshape(-1, 2)
        if kind == 'curve':
            immersed = _flag(header.get('immersed', 'false'), source)
            surface = DiscreteCurve(pts, immersed=immersed)
        elif kind == 'revolution':
            try:
                topology = Topology(header.get('topology', 'axis'))
            except ValueError:
                raise DomainError(f"{source}: unsupported topology "
                                  f"{header['topology']!r}") from None
            surface = ProfileSurface(pts, topology)
        else:
            raise DomainError(f'{source}: unsupported kind {kind!r}')
    return SurfaceRecord(surface, header.get('name', ''),
                         header.get('provenance', ''), meta)


def write_surface(path: str, surface, **kwargs) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(dumps_surface(surface, **kwargs))


def read_surface(path: str) -> SurfaceRecord:
    with open(path, encoding='utf-8') as f:
        return loads_surface(f.read(), path)


def _cell(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    return format_number(value)


def _write_rows(trace: FlowTrace, f: TextIO) -> None:
    writer = csv.writer(f, lineterminator='\n')
    writer.writerow(TRACE_COLUMNS)
    for sample in trace.samples:
        d = sample.diagnostics
        writer.writerow([_cell(sample.t)] + [
            _cell(getattr(d, name)) for name in _DIAGNOSTIC_FIELDS])


def write_trace_csv(trace: FlowTrace, target: Union[str, TextIO]) -> None:
    """One row per snapshot with the columns of TRACE_COLUMNS."""
    if isinstance(target, str):
        with open(target, 'w', encoding='utf-8', newline='') as f:
            _write_rows(trace, f)
    else:
        _write_rows(trace, target)


def read_trace_csv(source: Union[str, TextIO]) -> List[Dict[str, object]]:
    if isinstance(source, str):
        with open(source, encoding='utf-8', newline='') as f:
            return read_trace_csv(f)
    reader = csv.DictReader(source)
    missing = set(TRACE_COLUMNS[:8]) - set(reader.fieldnames or ())
    if missing:
        raise DomainError(f'trace file lacks columns {sorted(missing)}')
    rows = []
    for row in reader:
        parsed: Dict[str, object] = {}
        for key, value in row.items():
            if key == 'n_vertices':
                parsed[key] = int(value)
            elif key == 'resolved':
                parsed[key] = value == 'true'
            else:
                parsed[key] = float(value)
        rows.append(parsed)
    return rows


def write_snapshots(trace: FlowTrace, directory: str,
                    every: int = 1) -> List[str]:
    """Write every `every`-th snapshot (and the last) as surface files,
    plus trace.csv, into `directory`."""
    if every < 1:
        raise DomainError('every must be at least 1')
    os.makedirs(directory, exist_ok=True)
    params = trace.params
    meta_common = {
        'kind': trace.kind.value,
        'scheme': params.scheme.value,
        'dt': params.dt,
        'redistribute': str(params.redistribute).lower(),
        'stop': trace.stop_reason.value,
    }
    paths = []
    last = len(trace.samples) - 1
    for index, sample in enumerate(trace.samples):
        if index % every and index != last:
            continue
        path = os.path.join(directory, SNAPSHOT_PATTERN.format(index))
        write_surface(path, sample.surface, name=f'snapshot {index}',
                      provenance=f'{trace.kind.value} flow',
                      meta=dict(meta_common, t=float(sample.t)))
        paths.append(path)
    write_trace_csv(trace, os.path.join(directory, 'trace.csv'))
    logger.info('wrote %d snapshots to %s', len(paths), directory)
    return paths


def read_snapshots(directory: str) -> FlowTrace:
    """Rebuild a FlowTrace from a snapshot directory; diagnostics are
    recomputed from the surfaces."""
    names = sorted(n for n in os.listdir(directory)
                   if n.startswith('snapshot_') and n.endswith('.surf'))
    if not names:
        raise DomainError(f'no snapshots in {directory}')
    records = [read_surface(os.path.join(directory, n)) for n in names]
    meta = records[0].meta
    try:
        kind = FlowKind(meta.get('kind', 'rescaled'))
        params = FlowParams(
            dt=float(meta.get('dt', FlowParams.dt)),
            scheme=meta.get('scheme', FlowParams.scheme.value),
            redistribute=meta.get('redistribute', 'true') == 'true')
        stop = StopReason(records[-1].meta.get('stop', 't-max'))
        times = [float(r.meta['t']) for r in records]
    except (KeyError, ValueError) as exc:
        raise DomainError(f'{directory}: bad snapshot metadata ({exc})'
                          ) from None
    samples = [FlowSample(t, r.surface, diagnose(r.surface, t, kind,
                                                 params.resolution_guard))
               for t, r in zip(times, records)]
    return FlowTrace(kind, samples, params, stop)
