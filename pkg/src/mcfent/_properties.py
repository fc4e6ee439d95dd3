""" _properties.py - numerical checks of flow identities and monotonicity

Every check returns a CheckReport whose `passed` flag is exactly
`margin <= tolerance`.  Tolerances are functions of the mesh size h
(longest edge of the first snapshot) and the nominal time step dt, and
are recorded in the report.
"""

import dataclasses
import logging
import math
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.optimize import least_squares

from ._config import Scheme
from ._entropy import entropy_sup
from ._errors import DomainError
from ._flow import FlowKind, FlowTrace, TangentSequence
from ._geometry import Containment, DiscreteCurve, contains, quantities
from ._stability import assemble_operator


__all__ = (
    'CheckReport',
    'check_simons_identities',
    'check_monotonicity_suite',
    'check_ratio_bound',
    'check_tangent_roundness',
    'check_entropy_monotone',
)


logger = logging.getLogger(__name__)


# Residuals below this are round-off; refinement orders are meaningless.
ROUNDOFF = 1e-9

MIN_ORDER = 1.5

# Fit deviations below this count as round.
ROUND_FLOOR = 1e-6


@dataclasses.dataclass(frozen=True, eq=False)
class CheckReport:
    name: str
    passed: bool
    margin: float
    tolerance: float
    applicable: bool = True
    location: Optional[Tuple[float, int]] = None
    parameters: Dict[str, Any] = dataclasses.field(default_factory=dict)
    notes: Tuple[str, ...] = ()
    subchecks: Tuple['CheckReport', ...] = ()

    def lines(self, prefix: str = '') -> List[str]:
        """`key = value` lines for text reports."""
        key = f'{prefix}{self.name}'
        out = [
            f'{key}.passed = {str(self.passed).lower()}',
            f'{key}.applicable = {str(self.applicable).lower()}',
            f'{key}.margin = {self.margin:.12g}',
            f'{key}.tolerance = {self.tolerance:.12g}',
        ]
        if self.location is not None:
            out.append(f'{key}.location.t = {self.location[0]:.12g}')
            out.append(f'{key}.location.vertex = {self.location[1]}')
        for name, value in self.parameters.items():
            if isinstance(value, float):
                value = f'{value:.12g}'
            out.append(f'{key}.{name} = {value}')
        for note in self.notes:
            out.append(f'{key}.note = {note}')
        for sub in self.subchecks:
            out.extend(sub.lines(f'{key}.'))
        return out


def _report(name, margin, tolerance, **kwargs) -> CheckReport:
    margin = float(margin)
    return CheckReport(name, bool(margin <= tolerance), margin,
                       float(tolerance), **kwargs)


def _vacuous(name, tolerance, note) -> CheckReport:
    return CheckReport(name, True, 0.0, float(tolerance), applicable=False,
                       notes=(note,))


def _bundle(name, subchecks, **kwargs) -> CheckReport:
    margin = max(sub.margin - sub.tolerance for sub in subchecks)
    return _report(name, margin, 0.0, subchecks=tuple(subchecks), **kwargs)


def _uniform_samples(trace: FlowTrace):
    samples = trace.samples
    if len(samples) < 3:
        raise DomainError('identity checks need at least three snapshots')
    dts = np.diff([s.t for s in samples])
    dt = dts[0]
    uneven = np.nonzero(np.abs(dts - dt) > 1e-9 * dt)[0]
    if len(uneven):
        samples = samples[:uneven[0] + 1]
    if len(samples) < 3:
        raise DomainError('identity checks need snapshots at a uniform dt')
    if len({s.surface.count for s in samples}) != 1:
        raise DomainError('vertex count changed along the trace; vertices '
                          'cannot be tracked')
    return samples, float(dt)


def _simons_residuals(trace: FlowTrace) -> Dict[str, Any]:
    if trace.kind is not FlowKind.RESCALED:
        raise DomainError('identity checks need a rescaled flow trace')
    if trace.params.scheme is not Scheme.EXPLICIT:
        raise DomainError('identity checks need an explicit-scheme trace')
    if trace.params.redistribute:
        raise DomainError('identity checks need a trace without tangential '
                          'redistribution (vertex tracking is invalid)')
    samples, dt = _uniform_samples(trace)
    curve = isinstance(samples[0].surface, DiscreteCurve)
    qs = [quantities(s.surface) for s in samples]
    times = [s.t for s in samples]
    names = ['mean', 'support', 'phi'] + (['scaled-phi'] if curve else [])
    worst = {name: (0.0, times[1], 0) for name in names}

    def central(f, k):
        return (f(k + 1) - f(k - 1)) / (2 * dt)

    for k in range(1, len(samples) - 1):
        op = assemble_operator(samples[k].surface)
        mean = qs[k].mean_curvature
        support = qs[k].support
        phi = qs[k].phi
        residuals = {
            'mean': central(lambda j: qs[j].mean_curvature, k)
            - op.apply(mean) + mean,
            'support': central(lambda j: qs[j].support, k)
            - op.apply(support) + 2 * mean,
            'phi': central(lambda j: qs[j].phi, k) - op.apply(phi),
        }
        if curve:
            scaled = math.exp(times[k]) * phi
            residuals['scaled-phi'] = (
                central(lambda j: math.exp(times[j]) * qs[j].phi, k)
                - op.apply(scaled) - scaled)
        for name, values in residuals.items():
            vertex = int(np.argmax(np.abs(values)))
            value = float(abs(values[vertex]))
            if value > worst[name][0]:
                worst[name] = (value, times[k], vertex)
    return {'h': trace.h0, 'dt': dt, 'worst': worst}


def check_simons_identities(traces: Union[FlowTrace, Sequence[FlowTrace]]
                            ) -> CheckReport:
    """Check (d/dt - L)H = -H, (d/dt - L)<x, n> = -2H and
    (d/dt - L)phi = 0 along explicit rescaled flows, plus
    (d/dt - L)(e^t phi) = e^t phi for curves.

    A single trace passes when every residual is at most 10 h^2 + 10 dt.
    A refinement ladder (h halved, dt quartered) passes when each
    residual decays with order at least 1.5 in h, or is at round-off.
    """
    if isinstance(traces, FlowTrace):
        traces = [traces]
    runs = [_simons_residuals(tr) for tr in traces]
    if not runs:
        raise DomainError('no traces given')
    if len(runs) == 1:
        run = runs[0]
        tol = 10 * run['h'] ** 2 + 10 * run['dt']
        subs = []
        for name, (value, t, vertex) in run['worst'].items():
            subs.append(_report(name, value, tol, location=(t, vertex)))
        return _bundle('simons', subs,
                       parameters={'h': run['h'], 'dt': run['dt']})

    runs.sort(key=lambda run: -run['h'])
    subs = []
    for name in runs[0]['worst']:
        values = [run['worst'][name][0] for run in runs]
        orders = []
        for (a, b), (ha, hb) in zip(zip(values, values[1:]),
                                    zip([r['h'] for r in runs],
                                        [r['h'] for r in runs[1:]])):
            if a <= ROUNDOFF:
                continue
            if b <= ROUNDOFF:
                orders.append(math.inf)
            else:
                orders.append(math.log(a / b) / math.log(ha / hb))
        order = min(orders) if orders else math.inf
        params = {'residuals': ' '.join(f'{v:.6g}' for v in values),
                  'order': order}
        subs.append(_report(name, MIN_ORDER - order if math.isfinite(order)
                            else -math.inf, 0.0, parameters=params))
    return _bundle('simons', subs, parameters={
        'h': ' '.join(f'{r["h"]:.6g}' for r in runs),
        'dt': ' '.join(f'{r["dt"]:.6g}' for r in runs)})


def _nesting_pairs(count: int) -> List[Tuple[int, int]]:
    idx = sorted(set(np.linspace(0, count - 1, min(count, 8)).astype(int)))
    pairs = list(zip(idx, idx[1:]))
    if len(idx) > 2:
        pairs.append((idx[0], idx[-1]))
    return pairs


def check_monotonicity_suite(trace: FlowTrace) -> CheckReport:
    """Preservation of mean convexity (a), nesting (b), monotone F at
    (0, 1) (c) and exponential growth of min phi (d).

    Mean curvature flow traces use H in place of phi; (c) and (d) only
    apply to rescaled flows.
    """
    samples = trace.resolved_samples()
    if len(samples) < 2:
        raise DomainError('need at least two resolved snapshots')
    h0 = trace.h0
    tol = 10 * h0 ** 2
    rescaled = trace.kind is FlowKind.RESCALED
    field = 'min_phi' if rescaled else 'min_mean'
    m = np.array([getattr(s.diagnostics, field) for s in samples])
    t = np.array([s.t for s in samples])
    subs = []

    if m[0] >= -tol:
        k = int(np.argmin(m))
        subs.append(_report('convexity', -m[k], tol,
                            location=(float(t[k]), -1)))
    else:
        subs.append(_vacuous('convexity', tol,
                             'initial surface is not mean convex'))

    if m[0] > tol:
        failures = []
        for i, j in _nesting_pairs(len(samples)):
            status = contains(samples[i].surface, samples[j].surface)
            if status is not Containment.INSIDE:
                failures.append(f'{t[i]:.6g}/{t[j]:.6g}:{status.value}')
        subs.append(_report('nesting', len(failures), 0.0,
                            notes=tuple(failures)))
    else:
        subs.append(_vacuous('nesting', 0.0,
                             'initial surface is not strictly mean convex'))

    dt = trace.params.dt
    if rescaled:
        f = np.array([s.diagnostics.f01 for s in samples])
        rise = np.diff(f)
        k = int(np.argmax(rise))
        subs.append(_report('f-monotone', rise[k], 1e-6 + 10 * dt * h0 ** 2,
                            location=(float(t[k + 1]), -1)))
    else:
        subs.append(_vacuous('f-monotone', 0.0,
                             'F at (0, 1) is monotone for rescaled flows'))

    positive = np.nonzero(m > tol)[0]
    if rescaled and len(positive):
        k0 = int(positive[0])
        deficit = np.exp(0.5 * (t[k0:] - t[k0])) * m[k0] - m[k0:]
        k = int(np.argmax(deficit))
        subs.append(_report('growth', deficit[k], tol,
                            location=(float(t[k0 + k]), -1),
                            parameters={'from_t': float(t[k0])}))
    else:
        subs.append(_vacuous('growth', tol, 'min phi never positive'
                             if rescaled else 'rescaled flows only'))
    return _bundle('monotonicity', subs, parameters={'h': h0, 'dt': dt})


def check_ratio_bound(trace: FlowTrace) -> CheckReport:
    """max |B|^2 with B = e^t A / phi must not increase along a strictly
    rescaled-mean-convex flow.  The report's parameter C is the initial
    max |B|^2."""
    if trace.kind is not FlowKind.RESCALED:
        raise DomainError('the ratio bound applies to rescaled flows')
    samples = trace.resolved_samples()
    if len(samples) < 2:
        raise DomainError('need at least two resolved snapshots')
    phi = np.array([s.diagnostics.min_phi for s in samples])
    if np.any(phi <= ROUNDOFF):
        k = int(np.argmin(phi))
        raise DomainError(f'phi <= 0 at t = {samples[k].t:.6g} '
                          f'(min {phi[k]:.3g}); the ratio is undefined')
    b2 = np.array([s.diagnostics.max_b2 for s in samples])
    floor = np.minimum.accumulate(b2)
    rise = b2[1:] - floor[:-1]
    k = int(np.argmax(rise))
    tol = 10 * trace.h0 ** 2 + 10 * trace.params.dt
    return _report('ratio', rise[k], tol,
                   location=(samples[k + 1].t, -1),
                   parameters={'C': float(b2[0]), 'h': trace.h0,
                               'dt': trace.params.dt})


def _fit_circle(points: np.ndarray) -> Tuple[np.ndarray, float]:
    x, y = points[:, 0], points[:, 1]
    design = np.column_stack([x, y, np.ones_like(x)])
    coef = np.linalg.lstsq(design, x * x + y * y, rcond=None)[0]
    center = 0.5 * coef[:2]
    radius = math.sqrt(max(coef[2] + center @ center, 0.0))

    def residual(v):
        return np.hypot(x - v[0], y - v[1]) - v[2]

    fit = least_squares(residual, [center[0], center[1], radius])
    return fit.x[:2], float(abs(fit.x[2]))


def check_tangent_roundness(ts: TangentSequence, n: int,
                            ratio_constant: Optional[float] = None,
                            c1: Optional[float] = None) -> CheckReport:
    """Fit round circles to the tangent rescalings and compare the last
    resolved fit with the shrinker radius sqrt(2k).

    k = 1 for curves; for surfaces of revolution k = 2 when the singular
    point is on the axis (spherical singularity) and k = 1 otherwise
    (the tube of a ring singularity).  The fit deviation must at least
    halve from the first to the last resolved entry, unless it is already
    below ROUND_FLOOR.  With `ratio_constant` C and `c1`, also check
    max|A_i| <= C max H_i + h_i C c1.
    """
    if n != ts.dimension:
        raise DomainError(f'dimension {n} does not match the tangent '
                          f'sequence ({ts.dimension})')
    entries = ts.resolved()
    skipped = len(ts.entries) - len(entries)
    notes = []
    if skipped:
        logger.warning('%d tangent entries are under-resolved', skipped)
        notes.append(f'{skipped} under-resolved entries skipped')
    k = 1
    if ts.profile and abs(ts.point[0]) < 1e-6:
        k = 2
    expected = math.sqrt(2 * k)
    if not entries:
        return CheckReport('tangent', False, math.inf, 0.02,
                           notes=tuple(notes + ['no resolved entries']),
                           parameters={'k': k})

    radii, deviations = [], []
    for entry in entries:
        pts = entry.points
        if ts.profile:
            if k == 2:
                mirror = pts * np.array([-1.0, 1.0])
                pts = np.vstack([pts, mirror])
            near = np.linalg.norm(pts, axis=1) <= 3 * expected
            if np.count_nonzero(near) >= 8:
                pts = pts[near]
        center, radius = _fit_circle(pts)
        radii.append(radius)
        deviations.append(float(np.max(np.abs(
            np.linalg.norm(pts - center, axis=1) - radius))))

    subs = [_report('radius', abs(radii[-1] / expected - 1), 0.02,
                    parameters={'fitted': radii[-1], 'expected': expected})]
    if len(deviations) > 1:
        # The deviation must at least halve across the sequence.
        target = max(0.5 * deviations[0], ROUND_FLOOR)
        subs.append(_report('roundness', deviations[-1] - target,
                            0.0, parameters={
                                'first': deviations[0],
                                'last': deviations[-1]}))
    else:
        subs.append(_vacuous('roundness', 0.0, 'single resolved entry'))
    if ratio_constant is not None and c1 is not None:
        excess = []
        for entry in entries:
            q = quantities(entry.surface)
            a_i = entry.scale * math.sqrt(q.norm_a2.max())
            h_i = entry.scale * q.mean_curvature.max()
            bound = ratio_constant * h_i + entry.scale * ratio_constant * c1
            excess.append(a_i - bound)
        subs.append(_report('curvature', max(excess), 1e-6, parameters={
            'C': ratio_constant, 'C1': c1}))
    else:
        subs.append(_vacuous('curvature', 1e-6, 'no ratio constant given'))
    return _bundle('tangent', subs, notes=tuple(notes), parameters={
        'k': k, 'radii': ' '.join(f'{r:.6g}' for r in radii),
        'scales': ' '.join(f'{e.scale:.6g}' for e in entries)})


def check_entropy_monotone(trace: FlowTrace, samples: int = 6) -> CheckReport:
    """Entropy must not increase along mean curvature flow of curves,
    up to 1e-4, on `samples` evenly spaced resolved snapshots."""
    if trace.kind is not FlowKind.MCF:
        raise DomainError('entropy monotonicity is checked on mean '
                          'curvature flow traces')
    resolved = trace.resolved_samples()
    if not resolved or not isinstance(resolved[0].surface, DiscreteCurve):
        raise DomainError('entropy monotonicity is checked for curves only')
    idx = sorted(set(np.linspace(0, len(resolved) - 1,
                                 min(samples, len(resolved))).astype(int)))
    times = [resolved[i].t for i in idx]
    values = [entropy_sup(resolved[i].surface).value for i in idx]
    if len(values) < 2:
        return _vacuous('entropy', 1e-4, 'fewer than two snapshots')
    rise = np.diff(values)
    k = int(np.argmax(rise))
    return _report('entropy', rise[k], 1e-4, location=(times[k + 1], -1),
                   parameters={'values': ' '.join(f'{v:.10g}'
                                                  for v in values)})
