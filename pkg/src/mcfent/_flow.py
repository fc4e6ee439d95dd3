""" _flow.py - mean curvature flow and rescaled mean curvature flow

Mean curvature flow moves each vertex by -H n; the rescaled flow moves it
by -phi n with phi = H - <x, n>/2, and shrinkers are its fixed points.
The two are related by M_t = exp(t/2) N_{-exp(-t)}.

Two schemes are available:

scheme          update                                           stability
------------------------------------------------------------------------------
EXPLICIT        X' = X - dt phi n                                dt ~ h^2
SEMI_IMPLICIT   (I - dt L) X' = X + dt <X, n>/2 n (rescaled)     unconditional

where L is the Laplace-Beltrami operator of the current surface.  On a
surface of revolution the radial component carries the extra -1/r^2
term of the rotation circles.  After every step vertices are
redistributed uniformly in arclength unless `FlowParams.redistribute`
is off.
"""

import bisect
import dataclasses
import enum
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from ._config import FlowParams, Scheme
from ._entropy import entropy_sup
from ._errors import ConvergenceError, DomainError, MeshError
from ._geometry import (
    DiscreteCurve, ProfileSurface, centroid, dilate, quantities,
    resample_arclength, ring_measure,
)


__all__ = (
    'FlowKind',
    'StopReason',
    'Diagnostics',
    'FlowSample',
    'FlowTrace',
    'SingularityEvent',
    'TangentEntry',
    'TangentSequence',
    'diagnose',
    'step_mcf',
    'step_rescaled',
    'run_flow',
    'detect_singularity',
    'mcf_to_rescaled',
    'rescaled_to_mcf',
    'tangent_rescalings',
    'blowup_time_bound',
)


logger = logging.getLogger(__name__)


# Explicit step limits, as multiples of the squared shortest edge.
_EXPLICIT_CFL = {1: 0.4, 2: 0.2}

_FIT_WINDOW = 20


class FlowKind(enum.Enum):
    MCF = 'mcf'
    RESCALED = 'rescaled'


class StopReason(enum.Enum):
    T_MAX = 't-max'
    CURVATURE = 'curvature'
    DT_MIN = 'dt-min'
    UNDER_RESOLVED = 'under-resolved'


@dataclasses.dataclass(frozen=True)
class Diagnostics:
    f01: float
    entropy_lb: float
    min_phi: float
    min_mean: float
    max_a: float
    max_b2: float
    n_vertices: int
    mesh_ratio: float
    h_max: float
    resolved: bool


@dataclasses.dataclass(frozen=True, eq=False)
class FlowSample:
    t: float
    surface: object
    diagnostics: Diagnostics


@dataclasses.dataclass(eq=False)
class FlowTrace:
    """Snapshots of a flow together with its diagnostics."""
    kind: FlowKind
    samples: List[FlowSample]
    params: FlowParams
    stop_reason: StopReason = StopReason.T_MAX
    a_max: Optional[float] = None
    truncated: bool = False

    def __len__(self):
        return len(self.samples)

    @property
    def last(self) -> FlowSample:
        return self.samples[-1]

    @property
    def h0(self) -> float:
        return self.samples[0].diagnostics.h_max

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(s.diagnostics, name) for s in self.samples])

    def resolved_samples(self) -> List[FlowSample]:
        return [s for s in self.samples if s.diagnostics.resolved]

    @property
    def singular(self) -> bool:
        return self.stop_reason is not StopReason.T_MAX


@dataclasses.dataclass(frozen=True)
class SingularityEvent:
    tau: float
    point: np.ndarray
    fit_quality: float
    reason: StopReason
    last_time: float
    compact: bool


@dataclasses.dataclass(frozen=True, eq=False)
class TangentEntry:
    scale: float
    time: float
    surface: object
    points: Optional[np.ndarray]
    under_resolved: bool


@dataclasses.dataclass(frozen=True, eq=False)
class TangentSequence:
    entries: Tuple[TangentEntry, ...]
    tau: float
    point: np.ndarray
    dimension: int
    profile: bool

    def resolved(self) -> List[TangentEntry]:
        return [e for e in self.entries if not e.under_resolved]


def diagnose(surface, t: float, kind: FlowKind,
             resolution_guard: float = 0.5,
             with_entropy: bool = False) -> Diagnostics:
    q = quantities(surface)
    n = surface.dimension
    pts = surface.points
    r2 = np.einsum('ij,ij->i', pts, pts)
    f01 = float((4 * np.pi) ** (-0.5 * n)
                * np.dot(q.weights, np.exp(-r2 / 4)))
    max_a = float(math.sqrt(q.norm_a2.max()))
    min_phi = float(q.phi.min())
    if kind is FlowKind.RESCALED and min_phi > 0:
        max_b2 = float(math.exp(2 * t) * np.max(q.norm_a2 / q.phi ** 2))
    else:
        max_b2 = math.nan
    entropy = entropy_sup(surface).value if with_entropy else math.nan
    return Diagnostics(
        f01=f01,
        entropy_lb=entropy,
        min_phi=min_phi,
        min_mean=float(q.mean_curvature.min()),
        max_a=max_a,
        max_b2=max_b2,
        n_vertices=surface.count,
        mesh_ratio=q.quality.ratio,
        h_max=q.quality.max_edge,
        resolved=max_a * q.quality.max_edge <= resolution_guard,
    )


def _coefficients(surface):
    """Off-diagonal weights of the Laplace-Beltrami operator per row:
    (up, down) multiply f[i+1] and f[i-1]."""
    if isinstance(surface, DiscreteCurve):
        lengths = surface.edge_lengths()
        prev = np.roll(lengths, 1)
        m = 0.5 * (lengths + prev)
        return 1.0 / (m * lengths), 1.0 / (m * prev)
    a = ring_measure(surface)
    p = surface.profile
    r = p[:, 0]
    lengths = surface.edge_lengths()
    if surface.closed:
        c = 0.5 * (r + np.roll(r, -1)) / lengths
        return c / a, np.roll(c, 1) / a
    c = 0.5 * (r[:-1] + r[1:]) / lengths
    up = np.zeros(len(p))
    down = np.zeros(len(p))
    up[:-1] = c / a[:-1]
    down[1:] = c / a[1:]
    return up, down


def _laplacian(up, down, closed: bool, shift=None):
    n = len(up)
    rows = np.arange(n)
    diag = -(up + down)
    if shift is not None:
        diag = diag - shift
    if closed:
        data = np.concatenate([up, down, diag])
        cols = np.concatenate([(rows + 1) % n, (rows - 1) % n, rows])
        rr = np.concatenate([rows, rows, rows])
    else:
        data = np.concatenate([up[:-1], down[1:], diag])
        cols = np.concatenate([rows[1:], rows[:-1], rows])
        rr = np.concatenate([rows[:-1], rows[1:], rows])
    return sp.csc_matrix((data, (rr, cols)), shape=(n, n))


def _implicit_points(surface, kind: FlowKind, dt: float) -> np.ndarray:
    q = quantities(surface)
    rhs = np.array(surface.points, dtype=float)
    if kind is FlowKind.RESCALED:
        rhs += dt * 0.5 * q.support[:, None] * q.normals
    up, down = _coefficients(surface)
    eye = sp.identity(len(rhs), format='csc')
    closed = surface.closed
    if isinstance(surface, DiscreteCurve):
        lu = splu(eye - dt * _laplacian(up, down, closed))
        return lu.solve(rhs)
    r = surface.profile[:, 0]
    lu_z = splu(eye - dt * _laplacian(up, down, closed))
    shift = np.zeros_like(r)
    interior = r > 0
    shift[interior] = 1.0 / r[interior] ** 2
    if not closed:
        # r = 0 stays fixed on the poles.
        up_r, down_r = up.copy(), down.copy()
        up_r[[0, -1]] = down_r[[0, -1]] = 0.0
        rhs[[0, -1], 0] = 0.0
    else:
        up_r, down_r = up, down
    lu_r = splu(eye - dt * _laplacian(up_r, down_r, closed, shift))
    return np.column_stack([lu_r.solve(rhs[:, 0]), lu_z.solve(rhs[:, 1])])


def _explicit_points(surface, kind: FlowKind, dt: float) -> np.ndarray:
    q = quantities(surface)
    speed = q.phi if kind is FlowKind.RESCALED else q.mean_curvature
    return surface.points - dt * speed[:, None] * q.normals


def _advance(surface, kind: FlowKind, params: FlowParams, dt: float):
    if params.scheme is Scheme.EXPLICIT:
        pts = _explicit_points(surface, kind, dt)
    else:
        pts = _implicit_points(surface, kind, dt)
    moved = surface.with_points(pts)
    if params.redistribute:
        return resample_arclength(moved)
    ratio = quantities(moved).quality.ratio
    if ratio < params.remesh_ratio:
        logger.warning('mesh quality %.3g below %.3g, remeshing by '
                       'arclength', ratio, params.remesh_ratio)
        return resample_arclength(moved)
    return moved


def _step(surface, kind: FlowKind, params: FlowParams, dt: float):
    while True:
        try:
            return _advance(surface, kind, params, dt), dt
        except MeshError as exc:
            dt *= 0.5
            logger.debug('step rejected (%s), retrying with dt = %.3g',
                         exc, dt)
            if dt < params.dt_min:
                raise ConvergenceError(
                    f'time step fell below {params.dt_min}',
                    {'dt': dt, 'reason': str(exc)}) from exc


def step_mcf(surface, dt: float, params: FlowParams = FlowParams()):
    """One mean curvature flow step of size dt (halved on rejection)."""
    return _step(surface, FlowKind.MCF, params, dt)[0]


def step_rescaled(surface, dt: float, params: FlowParams = FlowParams()):
    """One rescaled flow step of size dt (halved on rejection)."""
    return _step(surface, FlowKind.RESCALED, params, dt)[0]


def _step_size(surface, q, params: FlowParams, remaining: float) -> float:
    dt = params.dt
    if params.curvature_cfl is not None:
        dt = min(dt, params.curvature_cfl / max(q.norm_a2.max(), 1e-300))
    if params.scheme is Scheme.EXPLICIT:
        factor = _EXPLICIT_CFL[surface.dimension]
        dt = min(dt, factor * q.quality.min_edge ** 2)
    return min(dt, remaining)


def run_flow(surface, kind: FlowKind = FlowKind.RESCALED,
             params: FlowParams = FlowParams(),
             t_start: float = 0.0) -> FlowTrace:
    """Evolve `surface` from `t_start` until t_max elapses or a
    singularity is detected.

    The run stops when max|A| reaches the blow-up threshold, when
    max|A| * h exceeds `params.resolution_guard`, or when rejected steps
    push the time step below `params.dt_min`.
    """
    kind = FlowKind(kind)
    q = quantities(surface)
    a0 = math.sqrt(q.norm_a2.max())
    a_max = params.a_max if params.a_max is not None else (
        params.a_max_factor * a0)
    if not a_max > 10 * a0:
        raise DomainError(f'blow-up threshold {a_max:.6g} must exceed ten '
                          f'times the initial max|A| = {a0:.6g}')
    t_end = t_start + params.t_max
    logger.info('%s flow: %d vertices, t in [%g, %g], scheme %s',
                kind.value, surface.count, t_start, t_end,
                params.scheme.value)

    def record(t, surf, index):
        with_entropy = (params.entropy_every > 0
                        and index % params.entropy_every == 0
                        and isinstance(surf, DiscreteCurve))
        return FlowSample(t, surf, diagnose(surf, t, kind,
                                            params.resolution_guard,
                                            with_entropy))

    samples = [record(t_start, surface, 0)]
    current = surface
    t = t_start
    index = 0
    reason = StopReason.T_MAX
    while t_end - t > params.dt_min:
        dt = _step_size(current, q, params, t_end - t)
        try:
            current, used = _step(current, kind, params, dt)
        except ConvergenceError as exc:
            logger.warning('stopping at t = %.6g: %s', t, exc)
            reason = StopReason.DT_MIN
            break
        t += used
        index += 1
        q = quantities(current)
        max_a = math.sqrt(q.norm_a2.max())
        stop = None
        if max_a >= a_max:
            stop = StopReason.CURVATURE
        elif max_a * q.quality.max_edge > params.resolution_guard:
            stop = StopReason.UNDER_RESOLVED
        if (stop is not None or index % params.snapshot_every == 0
                or t_end - t <= params.dt_min):
            samples.append(record(t, current, index))
        if stop is not None:
            reason = stop
            break
    logger.info('%s flow stopped at t = %.6g (%s) after %d steps',
                kind.value, t, reason.value, index)
    return FlowTrace(kind, samples, params, reason, a_max)


def detect_singularity(trace: FlowTrace) -> Optional[SingularityEvent]:
    """Estimate the singular time and point of a trace that stopped on
    curvature blow-up, from a linear fit of 1/max|A|^2 over the last
    resolved samples.  Returns None when the trace ran to t_max."""
    if len(trace) < 10:
        raise DomainError(f'need at least 10 samples, got {len(trace)}')
    if not trace.singular:
        return None
    window = trace.resolved_samples()[-_FIT_WINDOW:]
    if len(window) < 3:
        raise DomainError('too few resolved samples to locate the '
                          'singularity')
    t = np.array([s.t for s in window])
    y = np.array([s.diagnostics.max_a ** -2 for s in window])
    slope, intercept = np.polyfit(t, y, 1)
    tau = -intercept / slope if slope < 0 else t[-1]
    tau = max(float(tau), trace.last.t)
    fitted = slope * t + intercept
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum((y - fitted) ** 2))
    quality = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0

    last = window[-1].surface
    a = np.sqrt(quantities(last).norm_a2)
    compact = bool(a.max() <= 2 * a.min())
    if compact and isinstance(last, ProfileSurface) and last.closed:
        # A shrinking tube: the singular set is a ring through the
        # centre of the profile loop.
        lengths = last.edge_lengths()
        point = np.average(last.points, axis=0,
                           weights=0.5 * (lengths + np.roll(lengths, 1)))
    elif compact:
        point = centroid(last)
    else:
        point = np.array(last.points[int(np.argmax(a))])
    logger.info('singularity at tau = %.10g, point %s (%s, fit %.6f)',
                tau, np.round(point, 6), 'compact' if compact else 'local',
                quality)
    return SingularityEvent(tau, point, quality, trace.stop_reason,
                            trace.last.t, compact)


def _interpolate(samples: Sequence[FlowSample], time: float):
    times = [s.t for s in samples]
    if time <= times[0]:
        return samples[0]
    j = bisect.bisect_right(times, time) - 1
    if j == len(samples) - 1 or times[j] == time:
        return samples[j]
    a, b = samples[j], samples[j + 1]
    if a.surface.count != b.surface.count:
        return a if time - times[j] <= times[j + 1] - time else b
    w = (time - times[j]) / (times[j + 1] - times[j])
    pts = (1 - w) * a.surface.points + w * b.surface.points
    try:
        surf = a.surface.with_points(pts)
    except MeshError:
        return a if w <= 0.5 else b
    resolved = a.diagnostics.resolved and b.diagnostics.resolved
    return FlowSample(time, surf, dataclasses.replace(a.diagnostics,
                                                      resolved=resolved))


def mcf_to_rescaled(trace: FlowTrace, tau: float,
                    t_end: Optional[float] = None,
                    dt_out: float = 1e-2) -> FlowTrace:
    """Rescale a mean curvature flow about (0, tau): t = -log(tau - s)
    and M_t = exp(t/2) N_s.  Snapshots are interpolated linearly in time.
    The result is flagged `truncated` when `t_end` lies past the last
    snapshot before tau."""
    if trace.kind is not FlowKind.MCF:
        raise DomainError('mcf_to_rescaled needs a mean curvature flow trace')
    before = [s for s in trace.samples if s.t < tau]
    if len(before) < 2:
        raise DomainError('the trace has fewer than two snapshots before tau')
    t_lo = -math.log(tau - before[0].t)
    t_hi = -math.log(tau - before[-1].t)
    truncated = False
    if t_end is not None:
        if t_end > t_hi:
            truncated = True
            logger.warning('rescaled trace truncated at t = %.6g '
                           '(requested %.6g)', t_hi, t_end)
        else:
            t_hi = t_end
    grid = np.arange(t_lo, t_hi + 1e-12, dt_out)
    out = []
    for t in grid:
        sample = _interpolate(before, tau - math.exp(-t))
        surf = dilate(sample.surface, math.exp(0.5 * t))
        out.append(FlowSample(float(t), surf,
                              diagnose(surf, float(t), FlowKind.RESCALED,
                                       trace.params.resolution_guard)))
    return FlowTrace(FlowKind.RESCALED, out, trace.params, trace.stop_reason,
                     None, truncated)


def rescaled_to_mcf(trace: FlowTrace) -> FlowTrace:
    """Undo the rescaling: N_s = sqrt(-s) M_{-log(-s)}, s = -exp(-t).
    The mean curvature flow becomes singular at s = 0."""
    if trace.kind is not FlowKind.RESCALED:
        raise DomainError('rescaled_to_mcf needs a rescaled flow trace')
    out = []
    for sample in trace.samples:
        s = -math.exp(-sample.t)
        surf = dilate(sample.surface, math.exp(-0.5 * sample.t))
        out.append(FlowSample(s, surf,
                              diagnose(surf, s, FlowKind.MCF,
                                       trace.params.resolution_guard)))
    a_max = None if trace.a_max is None else trace.a_max * math.exp(
        0.5 * trace.last.t)
    return FlowTrace(FlowKind.MCF, out, trace.params, trace.stop_reason,
                     a_max, trace.truncated)


def tangent_rescalings(trace: FlowTrace, event: SingularityEvent,
                       scales: Sequence[float]) -> TangentSequence:
    """Parabolic blow-ups (N_{tau - h^2} - y) / h of a mean curvature
    flow at the singular point, for strictly decreasing scales h."""
    if trace.kind is not FlowKind.MCF:
        raise DomainError('tangent rescalings need a mean curvature flow')
    scales = [float(h) for h in scales]
    if not scales or any(h <= 0 for h in scales) or any(
            b >= a for a, b in zip(scales, scales[1:])):
        raise DomainError('scales must be positive and strictly decreasing')
    first = trace.samples[0].t
    resolved = trace.resolved_samples()
    last_resolved = resolved[-1].t if resolved else -math.inf
    point = np.asarray(event.point, dtype=float)
    entries = []
    for h in scales:
        time = event.tau - h * h
        if time < first or time > last_resolved:
            logger.debug('scale %.3g: time %.6g outside the resolved '
                         'range', h, time)
            entries.append(TangentEntry(h, time, None, None, True))
            continue
        sample = _interpolate(trace.samples, time)
        pts = (sample.surface.points - point) / h
        entries.append(TangentEntry(h, time, sample.surface, pts,
                                    not sample.diagnostics.resolved))
    first_surface = trace.samples[0].surface
    return TangentSequence(tuple(entries), event.tau, point,
                           first_surface.dimension,
                           isinstance(first_surface, ProfileSurface))


def blowup_time_bound(c: float, c1: float, n: int) -> float:
    """Rescaled time by which a flow starting with phi >= c > 0 and
    |x| <= 2 c1 must become singular.

    phi grows at least like c exp(t/2) until it dominates |x|/2, after
    which the comparison f' = f^3/(4n) blows up within 2n/f^2.
    """
    if not c > 0:
        raise DomainError(f'c must be positive, got {c}')
    if c1 < 0:
        raise DomainError(f'C1 must be non-negative, got {c1}')
    t1 = max(0.0, 2 * math.log(2 * c1 / c)) if c1 > 0 else 0.0
    m1 = c * math.exp(0.5 * t1)
    return t1 + 2 * n / (m1 * m1)
