""" _shrinkers.py - exact and shooting-method self-shrinkers

Analytic shrinkers (spheres, generalized cylinders, Simons-type cones,
hyperplanes) are described by `AnalyticShape`.  Non-round compact
shrinkers are computed by shooting:

  * Abresch-Langer curves: plane curves with k = <x, n>/2, parametrized
    by coprime (p, q) with sqrt(2) < q/p < 2.  The curve closes after q
    periods of its curvature and winds p times around the origin.

  * the Angenent torus: the profile of a rotation surface in R^3 with
    H = <x, n>/2, symmetric under z -> -z.
"""

import dataclasses
import enum
import functools
import logging
import math
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from ._config import ShootingParams
from ._errors import ConvergenceError, DomainError
from ._geometry import (
    DiscreteCurve, ProfileSurface, Topology, quantities,
)


__all__ = (
    'ShapeKind',
    'AnalyticShape',
    'ShootingResult',
    'make_standard',
    'abresch_langer',
    'angenent_torus',
    'admissible_al',
)


logger = logging.getLogger(__name__)


# Shooting results with a larger residual are rejected.
RESIDUAL_LIMIT = 1e-5


class ShapeKind(enum.Enum):
    SPHERE = 'sphere'
    CYLINDER = 'cylinder'
    SIMONS_CONE = 'simons-cone'
    HYPERPLANE = 'hyperplane'
    TORUS = 'torus'


@dataclasses.dataclass(frozen=True)
class AnalyticShape:
    """Closed-form hypersurface descriptor.

    SPHERE(n, radius) is S^n of the given radius; CYLINDER(k, m) is
    S^k(sqrt(2k)) x R^m; SIMONS_CONE(k) is the cone over
    S^k(1/sqrt 2) x S^k(1/sqrt 2) in R^(2k+2); HYPERPLANE(n) is R^n;
    TORUS(radius, tube) is a round torus in R^3.
    """
    kind: ShapeKind
    dimension: int
    radius: Optional[float] = None
    k: Optional[int] = None
    m: Optional[int] = None
    tube: Optional[float] = None
    shrinker: bool = False

    def __post_init__(self):
        if self.dimension < 1:
            raise DomainError(f'dimension must be positive, got '
                              f'{self.dimension}')
        if self.kind is ShapeKind.SPHERE:
            if self.radius is None or not self.radius > 0:
                raise DomainError('a sphere needs a positive radius')
            if self.shrinker and not math.isclose(
                    self.radius, math.sqrt(2 * self.dimension),
                    rel_tol=1e-12):
                raise DomainError(
                    f'a shrinking S^{self.dimension} has radius '
                    f'sqrt({2 * self.dimension}), got {self.radius}')
        elif self.kind is ShapeKind.CYLINDER:
            if self.k is None or self.m is None or self.k < 1 or self.m < 0:
                raise DomainError(
                    f'unsupported cylinder (k, m) = ({self.k}, {self.m})')
            if self.k + self.m != self.dimension:
                raise DomainError('cylinder dimension must equal k + m')
        elif self.kind is ShapeKind.SIMONS_CONE:
            if self.k is None or self.k < 1:
                raise DomainError(f'unsupported cone parameter k = {self.k}')
            if self.dimension != 2 * self.k + 1:
                raise DomainError('cone dimension must equal 2k + 1')
        elif self.kind is ShapeKind.TORUS:
            if self.dimension != 2:
                raise DomainError('tori are only supported in R^3')
            if (self.radius is None or self.tube is None
                    or not 0 < self.tube < self.radius):
                raise DomainError('a torus needs 0 < tube < radius')

    @classmethod
    def sphere(cls, n: int, radius: Optional[float] = None):
        """S^n; the shrinker of radius sqrt(2n) when `radius` is None."""
        if radius is None:
            return cls(ShapeKind.SPHERE, n, radius=math.sqrt(2 * n),
                       shrinker=True)
        return cls(ShapeKind.SPHERE, n, radius=radius)

    @classmethod
    def cylinder(cls, k: int, m: int):
        return cls(ShapeKind.CYLINDER, k + m, radius=math.sqrt(2 * k),
                   k=k, m=m, shrinker=True)

    @classmethod
    def simons_cone(cls, k: int):
        return cls(ShapeKind.SIMONS_CONE, 2 * k + 1, k=k, shrinker=True)

    @classmethod
    def hyperplane(cls, n: int):
        return cls(ShapeKind.HYPERPLANE, n, shrinker=True)

    @classmethod
    def torus(cls, radius: float, tube: float):
        return cls(ShapeKind.TORUS, 2, radius=radius, tube=tube)

    @property
    def name(self) -> str:
        if self.kind is ShapeKind.SPHERE:
            return f'S^{self.dimension}'
        if self.kind is ShapeKind.CYLINDER:
            return f'S^{self.k}xR^{self.m}'
        if self.kind is ShapeKind.SIMONS_CONE:
            return f'C({self.k},{self.k})'
        if self.kind is ShapeKind.HYPERPLANE:
            return f'R^{self.dimension}'
        return f'T({self.radius:g},{self.tube:g})'


@dataclasses.dataclass(frozen=True, eq=False)
class ShootingResult:
    """Outcome of a shooting computation.

    `residual` is the maximum of |k - <x, n>/2| (resp. |H - <x, n>/2|)
    along the fine integration together with the closing mismatch;
    `discrete_residual` is max |phi| on the resampled output.
    """
    surface: object
    parameter: float
    residual: float
    discrete_residual: float
    axis_angle: float
    p: Optional[int] = None
    q: Optional[int] = None


def _accept(result: ShootingResult, what: str) -> ShootingResult:
    if not result.residual < RESIDUAL_LIMIT:
        raise ConvergenceError(
            f'{what}: shooting residual {result.residual:.3g} is not below '
            f'{RESIDUAL_LIMIT:g}; refine the integration step',
            {'residual': result.residual, 'parameter': result.parameter})
    return result


def make_standard(shape: AnalyticShape, resolution: int = 256):
    """Discretize circles, 2-spheres and tori; return other descriptors
    unchanged since they are handled in closed form."""
    if resolution < 64:
        raise DomainError(f'resolution must be at least 64, got {resolution}')
    if shape.kind is ShapeKind.SPHERE:
        if shape.dimension == 1:
            return DiscreteCurve.circle(shape.radius, resolution)
        if shape.dimension == 2:
            return ProfileSurface.sphere(shape.radius, resolution)
        return shape
    if shape.kind is ShapeKind.TORUS:
        return ProfileSurface.torus(shape.radius, shape.tube, resolution)
    return shape


def admissible_al(p: int, q: int) -> bool:
    return (p >= 1 and q >= 1 and math.gcd(p, q) == 1
            and math.sqrt(2) < q / p < 2)


def _rk4(rhs, y, h):
    k1 = rhs(y)
    k2 = rhs([a + 0.5 * h * b for a, b in zip(y, k1)])
    k3 = rhs([a + 0.5 * h * b for a, b in zip(y, k2)])
    k4 = rhs([a + h * b for a, b in zip(y, k3)])
    return [a + h / 6.0 * (b + 2 * c + 2 * d + e)
            for a, b, c, d, e in zip(y, k1, k2, k3, k4)]


def _al_rhs(y):
    x, z, th = y
    s, c = math.sin(th), math.cos(th)
    return [c, s, 0.5 * (x * s - z * c)]


def _al_event(y):
    x, z, th = y
    return x * math.cos(th) + z * math.sin(th)


def _al_event_rate(y):
    # d/ds <x, T> = 1 - 2 k^2 when k = <x, n>/2
    k = _al_rhs(y)[2]
    return 1.0 - 2.0 * k * k


def _polish(rhs, y, event, rate, guess):
    """Newton iteration on the step length from state `y` to the zero of
    `event`; returns (state, step)."""
    delta = guess
    state = _rk4(rhs, y, delta)
    for _ in range(20):
        g = event(state)
        if abs(g) < 1e-15:
            break
        dg = rate(state)
        if dg == 0:
            break
        delta -= g / dg
        state = _rk4(rhs, y, delta)
    return state, delta


def _al_half_period(a: float, h: float, max_length: float,
                    keep: bool = False):
    """Integrate from the curvature minimum at (a, 0) to the next
    curvature maximum, located by <x, T> changing sign from + to -."""
    y = [a, 0.0, 0.5 * math.pi]
    samples = [y] if keep else None
    s = 0.0
    g = 0.0
    while True:
        nxt = _rk4(_al_rhs, y, h)
        g_next = _al_event(nxt)
        if s > 0 and g > 0 >= g_next:
            end, delta = _polish(_al_rhs, y, _al_event, _al_event_rate,
                                 h * g / (g - g_next))
            if keep:
                samples.append(end)
            return end, s + delta, samples
        y, g = nxt, g_next
        s += h
        if keep:
            samples.append(y)
        if s > max_length:
            raise ConvergenceError(
                f'Abresch-Langer trajectory from a = {a} did not reach a '
                f'curvature maximum within length {max_length}',
                {'a': a})


def _al_mismatch(a, target, h, max_length):
    end, _, _ = _al_half_period(a, h, max_length)
    return math.atan2(end[1], end[0]) - target


def _resample_polyline(points: np.ndarray, arclength: np.ndarray,
                       count: int) -> np.ndarray:
    total = arclength[-1]
    u = np.arange(count) * (total / count)
    return np.column_stack([np.interp(u, arclength, points[:, 0]),
                            np.interp(u, arclength, points[:, 1])])


def _trajectory_residual(samples: np.ndarray, h: float, curvature) -> float:
    """Max deviation between a central difference of the tangent angle
    and the curvature the equation prescribes, over equally spaced
    interior samples."""
    th = samples[:, 2]
    if len(th) < 4:
        return 0.0
    dth = (th[2:-1] - th[:-3]) / (2 * h)
    return float(np.max(np.abs(dth - curvature(samples[1:-2]))))


@functools.lru_cache(maxsize=16)
def abresch_langer(p: int, q: int,
                   params: ShootingParams = ShootingParams()
                   ) -> ShootingResult:
    """Compute the (p, q) Abresch-Langer curve.

    p = 1 returns the shrinking circle.
    """
    if p == 1:
        curve = DiscreteCurve.circle(math.sqrt(2), params.resolution)
        res = float(np.max(np.abs(quantities(curve).phi)))
        return ShootingResult(curve, math.sqrt(2), 0.0, res, 0.0, 1, 1)
    if not admissible_al(p, q):
        raise DomainError(
            f'(p, q) = ({p}, {q}) is not admissible: need gcd(p, q) = 1 '
            f'and sqrt(2) < q/p < 2')

    target = math.pi * p / q
    lo, hi = 0.05, math.sqrt(2) - 0.01
    grid = np.linspace(lo, hi, 28)
    values = []
    for a in grid:
        try:
            values.append(_al_mismatch(a, target, params.scan_step,
                                       params.max_length))
        except ConvergenceError:
            values.append(math.nan)
    logger.debug('AL(%d,%d) scan: %s', p, q,
                 ', '.join(f'{v:.4g}' for v in values))

    bracket = None
    for i in range(len(grid) - 1):
        if (np.isfinite(values[i]) and np.isfinite(values[i + 1])
                and values[i] * values[i + 1] <= 0):
            bracket = i
            break
    if bracket is None:
        raise ConvergenceError(
            f'no sign change of the Abresch-Langer angle mismatch for '
            f'(p, q) = ({p}, {q})',
            {'interval': (lo, hi), 'target': target})

    def fine(a):
        return _al_mismatch(a, target, params.step, params.max_length)

    i, j = bracket, bracket + 1
    f_i, f_j = fine(grid[i]), fine(grid[j])
    while f_i * f_j > 0:
        # The coarse and fine integrations straddle the root differently.
        if i > 0:
            i -= 1
            f_i = fine(grid[i])
        if f_i * f_j > 0 and j < len(grid) - 1:
            j += 1
            f_j = fine(grid[j])
        if i == 0 and j == len(grid) - 1 and f_i * f_j > 0:
            raise ConvergenceError(
                'fine integration lost the Abresch-Langer bracket',
                {'interval': (grid[bracket], grid[bracket + 1])})
    a = brentq(fine, grid[i], grid[j], xtol=params.xtol)

    end, length, samples = _al_half_period(a, params.step, params.max_length,
                                           keep=True)
    samples = np.array(samples)
    arc = np.concatenate([np.arange(len(samples) - 1) * params.step,
                          [length]])
    res_traj = _trajectory_residual(
        samples[:-1], params.step,
        lambda y: 0.5 * (y[:, 0] * np.sin(y[:, 2]) - y[:, 1] * np.cos(y[:, 2])))

    # One period of the curvature: mirror the half arc across the x axis.
    half = samples[:, :2]
    mirrored = half[::-1] * np.array([1.0, -1.0])
    period = np.vstack([mirrored, half[1:]])
    period_arc = np.concatenate([length - arc[::-1], length + arc[1:]])
    sweep = 2 * math.atan2(end[1], end[0])
    pieces, arcs = [], []
    for j in range(q):
        c, s = math.cos(j * sweep), math.sin(j * sweep)
        rot = np.array([[c, -s], [s, c]])
        chunk = period @ rot.T
        chunk_arc = period_arc + j * 2 * length
        if j > 0:
            chunk, chunk_arc = chunk[1:], chunk_arc[1:]
        pieces.append(chunk)
        arcs.append(chunk_arc)
    fine_curve = np.vstack(pieces)
    fine_arc = np.concatenate(arcs)
    closure = float(np.linalg.norm(fine_curve[-1] - fine_curve[0]))
    vertices = _resample_polyline(fine_curve, fine_arc, params.resolution)
    curve = DiscreteCurve.from_points(vertices, immersed=True)
    residual = max(res_traj, closure, abs(_al_event(end)))
    discrete = float(np.max(np.abs(quantities(curve).phi)))
    axis_angle = math.atan2(mirrored[0, 1], mirrored[0, 0])
    logger.info('AL(%d,%d): a = %.12g residual = %.3g discrete = %.3g',
                p, q, a, residual, discrete)
    return _accept(ShootingResult(curve, a, residual, discrete, axis_angle,
                                  p, q), f'AL({p},{q})')


def _torus_rhs(y):
    r, z, th = y
    s, c = math.sin(th), math.cos(th)
    return [c, s, 0.5 * (r * s - z * c) - s / r]


def _torus_event(y):
    return y[1]


def _torus_event_rate(y):
    return math.sin(y[2])


def _torus_half(r0: float, h: float, params: ShootingParams,
                keep: bool = False):
    """Integrate the upper half of the profile from (r0, 0), heading up,
    to the first return to z = 0.  Returns None for trajectories that
    approach the axis or do not come back."""
    y = [r0, 0.0, 0.5 * math.pi]
    samples = [y] if keep else None
    s = 0.0
    while True:
        nxt = _rk4(_torus_rhs, y, h)
        if nxt[0] < params.axis_guard:
            return None
        if s > 0 and y[1] > 0 >= nxt[1]:
            end, delta = _polish(_torus_rhs, y, _torus_event,
                                 _torus_event_rate,
                                 h * y[1] / (y[1] - nxt[1]))
            end[1] = 0.0
            if keep:
                samples.append(end)
            return end, s + delta, samples
        y = nxt
        s += h
        if keep:
            samples.append(y)
        if s > params.max_length:
            return None


def _torus_mismatch(r0, h, params):
    half = _torus_half(r0, h, params)
    if half is None:
        return None
    end = half[0]
    if not 0 < end[0] < r0:
        return None
    return math.cos(end[2])


@functools.lru_cache(maxsize=4)
def angenent_torus(params: ShootingParams = ShootingParams()
                   ) -> ShootingResult:
    """Shoot for the Angenent torus profile in the (r, z) half plane.

    The outermost point (r0, 0) is the shooting parameter; the profile is
    closed when it meets z = 0 again vertically.
    """
    start, stop, step = params.torus_scan
    grid = np.arange(start, stop + 0.5 * step, step)
    values: List[Optional[float]] = [
        _torus_mismatch(r0, params.scan_step, params) for r0 in grid]

    bracket: Optional[Tuple[float, float]] = None
    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if a is not None and b is not None and a * b <= 0:
            bracket = grid[i], grid[i + 1]
            break
    if bracket is None:
        raise ConvergenceError(
            'no valid sign change of the torus closing mismatch',
            {'interval': (float(grid[0]), float(grid[-1]))})
    logger.debug('torus bracket %s', bracket)

    def fine(r0):
        value = _torus_mismatch(r0, params.step, params)
        if value is None:
            raise ConvergenceError(
                f'torus trajectory from r0 = {r0} became invalid',
                {'interval': bracket})
        return value

    r0 = brentq(fine, bracket[0], bracket[1], xtol=params.xtol)
    end, length, samples = _torus_half(r0, params.step, params, keep=True)
    samples = np.array(samples)
    arc = np.concatenate([np.arange(len(samples) - 1) * params.step,
                          [length]])
    res_traj = _trajectory_residual(
        samples[:-1], params.step,
        lambda y: (0.5 * (y[:, 0] * np.sin(y[:, 2]) - y[:, 1] * np.cos(y[:, 2]))
                   - np.sin(y[:, 2]) / y[:, 0]))

    upper = samples[:, :2]
    lower = upper[-2:0:-1] * np.array([1.0, -1.0])
    loop = np.vstack([upper, lower, upper[:1]])
    loop_arc = np.concatenate([arc, 2 * length - arc[-2:0:-1], [2 * length]])
    profile = _resample_polyline(loop, loop_arc, params.resolution)
    surface = ProfileSurface(profile, Topology.CLOSED)
    residual = max(res_traj, abs(math.cos(end[2])))
    discrete = float(np.max(np.abs(quantities(surface).phi)))
    logger.info('torus: r0 = %.12g inner = %.12g residual = %.3g '
                'discrete = %.3g', r0, end[0], residual, discrete)
    return _accept(ShootingResult(surface, r0, residual, discrete, 0.0),
                   'torus')
