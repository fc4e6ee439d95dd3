""" _entropy.py - Gaussian area functionals and entropy

F_{x0,t0}(M) = (4 pi t0)^(-n/2) * integral over M of exp(-|x - x0|^2 / 4 t0)

and the entropy lambda(M) is its supremum over centers x0 and scales
t0 > 0.  Discrete surfaces are integrated with the vertex weights of
`quantities`; analytic shapes use closed forms.
"""

import dataclasses
import enum
import logging
import math
from typing import NamedTuple, Tuple

import numpy as np
from scipy.integrate import quad, trapezoid
from scipy.optimize import minimize
from scipy.special import gammaln

from ._config import EntropyOptions
from ._errors import DomainError
from ._geometry import (
    DiscreteCurve, ProfileSurface, centroid, diameter, quantities,
)
from ._shrinkers import AnalyticShape, ShapeKind


__all__ = (
    'CenterScale',
    'EntropyStatus',
    'StartValue',
    'EntropyResult',
    'f_functional',
    'entropy_sup',
    'lambda_sphere',
    'lambda_cylinder',
    'simons_cone_entropy',
    'simons_cone_entropy_quadrature',
    'line_product_f',
)


logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True)
class CenterScale:
    """A center x0 in the ambient space and a scale t0 > 0."""
    x0: Tuple[float, ...]
    t0: float

    def __post_init__(self):
        object.__setattr__(self, 'x0', tuple(float(c) for c in self.x0))
        if not self.t0 > 0:
            raise DomainError(f'scale t0 must be positive, got {self.t0}')

    @classmethod
    def on_axis(cls, z: float, t0: float) -> 'CenterScale':
        return cls((0.0, 0.0, z), t0)


class EntropyStatus(enum.Enum):
    CONVERGED = 'converged'
    BOUNDARY_SUSPECT = 'boundary-suspect'


class StartValue(NamedTuple):
    """One local ascent: where it started, what it reached and whether
    the optimizer reported convergence."""
    start: CenterScale
    value: float
    success: bool


@dataclasses.dataclass(frozen=True)
class EntropyResult:
    value: float
    argmax: CenterScale
    status: EntropyStatus
    starts: int
    successes: int
    axis_restricted: bool = False
    per_start: Tuple[StartValue, ...] = ()


def lambda_sphere(n: int) -> float:
    """Entropy of S^n, (n/2e)^(n/2) * omega_n / (2 pi)^(n/2) in closed
    form, with lambda(S^0) = 2."""
    if n < 0:
        raise DomainError(f'sphere dimension must be non-negative, got {n}')
    if n == 0:
        return 2.0
    log_area = (math.log(2.0) + 0.5 * (n + 1) * math.log(math.pi)
                - gammaln(0.5 * (n + 1)))
    log_value = (-0.5 * n * math.log(4 * math.pi) + log_area
                 + 0.5 * n * math.log(2 * n) - 0.5 * n)
    return float(math.exp(log_value))


def lambda_cylinder(k: int, m: int = 0) -> float:
    """Entropy of S^k x R^m, which does not depend on m."""
    if m < 0:
        raise DomainError(f'number of line factors must be >= 0, got {m}')
    return lambda_sphere(k)


def _cone_prefactor_log(k: int) -> float:
    # (4 pi)^(-(2k+1)/2) * |S^k|^2 * 2^-k
    log_sk = (math.log(2.0) + 0.5 * (k + 1) * math.log(math.pi)
              - gammaln(0.5 * (k + 1)))
    return (-0.5 * (2 * k + 1) * math.log(4 * math.pi) + 2 * log_sk
            - k * math.log(2.0))


def simons_cone_entropy(k: int) -> float:
    """Entropy of the cone over S^k(1/sqrt 2) x S^k(1/sqrt 2), attained
    at the vertex: 2 sqrt(pi) 2^-k Gamma(k + 1/2) / Gamma((k + 1)/2)^2."""
    if k < 1:
        raise DomainError(f'cone parameter must be >= 1, got {k}')
    log_value = (math.log(2.0) + 0.5 * math.log(math.pi) - k * math.log(2.0)
                 + gammaln(k + 0.5) - 2 * gammaln(0.5 * (k + 1)))
    return float(math.exp(log_value))


def simons_cone_entropy_quadrature(k: int) -> Tuple[float, float]:
    """Cone entropy with the radial integral done numerically; returns
    (value, absolute error estimate)."""
    if k < 1:
        raise DomainError(f'cone parameter must be >= 1, got {k}')
    peak = math.sqrt(4 * k)
    log_peak = 2 * k * math.log(peak) - peak * peak / 4

    def integrand(r):
        if r == 0:
            return 0.0
        return math.exp(2 * k * math.log(r) - r * r / 4 - log_peak)

    upper = peak + 60.0
    integral, err = quad(integrand, 0.0, upper, points=[peak],
                         epsabs=0.0, epsrel=1e-13, limit=200)
    log_scale = _cone_prefactor_log(k) + log_peak
    scale = math.exp(log_scale)
    return integral * scale, err * scale


def line_product_f(surface, half_length: float, samples: int = 2001) -> float:
    """F at (0, 1) of the product of `surface` with the segment
    [-half_length, half_length], by the trapezoid rule along the segment.

    Tends to F of the untruncated product, which equals F of `surface`,
    as the segment grows.
    """
    if not half_length > 0:
        raise DomainError(f'half_length must be positive, got {half_length}')
    if samples < 3:
        raise DomainError(f'need at least 3 samples, got {samples}')
    origin = CenterScale((0.0,) * (surface.dimension + 1), 1.0)
    base = f_functional(surface, origin)
    y = np.linspace(-half_length, half_length, samples)
    line = trapezoid(np.exp(-y * y / 4), y) / math.sqrt(4 * math.pi)
    return base * float(line)


def _analytic_f(shape: AnalyticShape, cs: CenterScale) -> float:
    t0 = cs.t0
    if shape.kind is ShapeKind.HYPERPLANE:
        if len(cs.x0) != shape.dimension + 1:
            raise DomainError('center has the wrong ambient dimension')
        d = cs.x0[-1]
        return math.exp(-d * d / (4 * t0))
    if shape.kind in (ShapeKind.SPHERE, ShapeKind.CYLINDER):
        k = shape.dimension if shape.kind is ShapeKind.SPHERE else shape.k
        radius = shape.radius
        if len(cs.x0) not in (k + 1, shape.dimension + 1):
            raise DomainError('center has the wrong ambient dimension')
        if any(c != 0 for c in cs.x0[:k + 1]):
            raise DomainError('closed-form F of a sphere or cylinder '
                              'requires a center on its axis of symmetry')
        log_area = (math.log(2.0) + 0.5 * (k + 1) * math.log(math.pi)
                    - gammaln(0.5 * (k + 1)) + k * math.log(radius))
        return math.exp(-0.5 * k * math.log(4 * math.pi * t0) + log_area
                        - radius * radius / (4 * t0))
    if shape.kind is ShapeKind.SIMONS_CONE:
        if any(c != 0 for c in cs.x0):
            raise DomainError('closed-form F of a cone requires the '
                              'center at its vertex')
        return simons_cone_entropy(shape.k)
    raise DomainError(f'no closed form for {shape.kind.value}')


def _plane_center(surface, cs: CenterScale) -> np.ndarray:
    """Center expressed in the coordinates of `surface.points`."""
    if isinstance(surface, DiscreteCurve):
        if len(cs.x0) != 2:
            raise DomainError('a plane curve needs a center in R^2')
        return np.array(cs.x0)
    if len(cs.x0) != 3:
        raise DomainError('a surface of revolution needs a center in R^3')
    x, y, z = cs.x0
    if math.hypot(x, y) > 1e-12:
        raise DomainError('F of a surface of revolution is only evaluated '
                          'at centers on the axis')
    return np.array([0.0, z])


def _gaussian(points, weights, n, center, t0):
    d = points - center
    d2 = np.einsum('ij,ij->i', d, d)
    g = weights * np.exp(-d2 / (4 * t0))
    c = (4 * np.pi * t0) ** (-0.5 * n)
    value = c * g.sum()
    grad_center = c * (g[:, None] * d).sum(axis=0) / (2 * t0)
    grad_log_t0 = c * np.dot(g, d2 / (4 * t0) - 0.5 * n)
    return value, grad_center, grad_log_t0


def f_functional(surface, cs: CenterScale) -> float:
    """Gaussian area F_{x0,t0} of a discrete surface or analytic shape."""
    if isinstance(surface, AnalyticShape):
        return _analytic_f(surface, cs)
    q = quantities(surface)
    center = _plane_center(surface, cs)
    return float(_gaussian(surface.points, q.weights, surface.dimension,
                           center, cs.t0)[0])


def _to_center_scale(surface, center: np.ndarray, t0: float) -> CenterScale:
    if isinstance(surface, DiscreteCurve):
        return CenterScale(tuple(center), t0)
    return CenterScale.on_axis(float(center[1]), t0)


def entropy_sup(surface, options: EntropyOptions = EntropyOptions()
                ) -> EntropyResult:
    """Maximize F over centers and scales with bounded L-BFGS multistart.

    Starts are the centroid plus `options.probes` points at half the
    diameter, each crossed with `options.scales` log-spaced scales.
    Surfaces of revolution are searched over centers on the axis only.
    The argmax reported is the lexicographically smallest (x0, t0) among
    starts whose value lies within `options.tie_tol` of the best.
    """
    if isinstance(surface, AnalyticShape):
        return _analytic_entropy(surface)
    q = quantities(surface)
    points = surface.points
    weights = q.weights
    n = surface.dimension
    diam = diameter(surface)
    base = centroid(surface)
    axis = isinstance(surface, ProfileSurface)

    angles = 2 * np.pi * np.arange(options.probes) / options.probes
    centers = [base]
    for a in angles:
        offset = 0.5 * diam * np.array([math.cos(a), math.sin(a)])
        if axis:
            offset = np.array([0.0, offset[0]])
        centers.append(base + offset)
    centers = np.unique(np.round(np.array(centers), 14), axis=0)
    log_t = np.linspace(math.log(diam ** 2 / 400), math.log(4 * diam ** 2),
                        options.scales)
    lo, hi = math.log(diam ** 2 / 4000), math.log(40 * diam ** 2)

    # Variables: center offset from the centroid in units of the
    # diameter (free components only) and log t0.
    def unpack(v):
        c = base.copy()
        if axis:
            c[1] += v[0] * diam
        else:
            c += v[:2] * diam
        return c, v[-1]

    def objective(v):
        c, lt = unpack(v)
        value, gc, glt = _gaussian(points, weights, n, c, math.exp(lt))
        gc = gc * diam
        grad = [gc[1]] if axis else list(gc)
        return -value, -np.array(grad + [glt])

    free = 1 if axis else 2
    bounds = [(None, None)] * free + [(lo, hi)]
    candidates = []
    per_start = []
    successes = 0
    for c0 in centers:
        rel = (c0 - base) / diam
        start = [rel[1]] if axis else list(rel)
        for lt in log_t:
            res = minimize(objective, np.array(start + [lt]), jac=True,
                           method='L-BFGS-B', bounds=bounds,
                           options={'maxiter': options.maxiter,
                                    'ftol': 1e-15, 'gtol': 1e-11})
            if res.success:
                successes += 1
            per_start.append(StartValue(
                _to_center_scale(surface, c0, math.exp(lt)),
                -float(res.fun), bool(res.success)))
            c, t = unpack(res.x)
            on_bound = (res.x[-1] - lo < 1e-9) or (hi - res.x[-1] < 1e-9)
            candidates.append((-float(res.fun), tuple(c), math.exp(t),
                               on_bound))

    best = max(v for v, _, _, _ in candidates)
    ties = [cand for cand in candidates if cand[0] >= best - options.tie_tol]
    value, center, t0, on_bound = min(ties, key=lambda cand: (cand[1],
                                                              cand[2]))
    status = EntropyStatus.CONVERGED
    if successes == 0 or on_bound:
        status = EntropyStatus.BOUNDARY_SUSPECT
        logger.warning('entropy maximization is boundary-suspect '
                       '(%d of %d starts converged, argmax t0 = %.6g)',
                       successes, len(candidates), t0)
    argmax = _to_center_scale(surface, np.array(center), t0)
    logger.debug('entropy %.12g at %s', value, argmax)
    return EntropyResult(value, argmax, status, len(candidates), successes,
                         axis_restricted=axis, per_start=tuple(per_start))


def _analytic_entropy(shape: AnalyticShape) -> EntropyResult:
    if shape.kind is ShapeKind.SPHERE:
        value = lambda_sphere(shape.dimension)
        t0 = shape.radius ** 2 / (2 * shape.dimension)
        argmax = CenterScale((0.0,) * (shape.dimension + 1), t0)
    elif shape.kind is ShapeKind.CYLINDER:
        value = lambda_cylinder(shape.k, shape.m)
        argmax = CenterScale((0.0,) * (shape.dimension + 1), 1.0)
    elif shape.kind is ShapeKind.SIMONS_CONE:
        value = simons_cone_entropy(shape.k)
        argmax = CenterScale((0.0,) * (shape.dimension + 1), 1.0)
    elif shape.kind is ShapeKind.HYPERPLANE:
        value = 1.0
        argmax = CenterScale((0.0,) * (shape.dimension + 1), 1.0)
    else:
        raise DomainError(f'no closed-form entropy for {shape.kind.value}; '
                          f'discretize it with make_standard first')
    return EntropyResult(value, argmax, EntropyStatus.CONVERGED, 0, 0)
