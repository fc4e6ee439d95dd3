""" _geometry.py - discrete curves and profiles of surfaces of revolution

A hypersurface is represented by one of two classes:

class              ambient  dimension  vertices
------------------------------------------------------------------------------
DiscreteCurve      R^2      1          closed polygon, counter-clockwise
ProfileSurface     R^3      2          (r, z) profile of a rotation surface

An axis-terminated profile (Topology.AXIS) runs from a pole on the axis
r = 0 to another pole, counter-clockwise in the (r, z) half plane, so the
outward normal of a sphere profile points away from the origin.  A closed
profile (Topology.CLOSED) is a counter-clockwise loop in r > 0 and
describes a torus.

Curvatures follow the convention H = div(n) for the outward normal n, so
that H = 1/R on a circle of radius R and H = 2/R on a sphere.
"""

import dataclasses
import enum
import logging
import math
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np
import shapely
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import directed_hausdorff, pdist
from shapely.geometry import LinearRing, LineString

from ._errors import DomainError, MeshError


__all__ = (
    'Topology',
    'Containment',
    'MeshQuality',
    'Quantities',
    'DiscreteCurve',
    'ProfileSurface',
    'quantities',
    'curve_quantities',
    'revolution_quantities',
    'mesh_quality',
    'ring_measure',
    'contains',
    'diameter',
    'centroid',
    'resample_arclength',
    'normal_graph',
    'translate',
    'rotate',
    'dilate',
    'hausdorff',
)


logger = logging.getLogger(__name__)


MIN_VERTICES = 8

# Maximum angle between the first/last profile edge and the horizontal.
POLE_ANGLE_TOL = 0.35

_DEGENERATE_EPS = 64 * np.finfo(float).eps


class Topology(enum.Enum):
    CLOSED = 'closed'
    AXIS = 'axis'


class Containment(enum.Enum):
    INSIDE = 'inside'
    NOT_INSIDE = 'not-inside'
    INDETERMINATE = 'indeterminate'


class MeshQuality(NamedTuple):
    min_edge: float
    max_edge: float
    ratio: float
    degenerate: int


@dataclasses.dataclass(frozen=True, eq=False)
class Quantities:
    """Per-vertex geometric quantities of a discrete hypersurface.

    For a profile, `kappa` is the curvature of the profile curve and
    `kappa_ring` the curvature of the rotation circles.  Curves have no
    `kappa_ring`.
    """
    normals: np.ndarray
    kappa: np.ndarray
    kappa_ring: Optional[np.ndarray]
    mean_curvature: np.ndarray
    norm_a2: np.ndarray
    support: np.ndarray
    phi: np.ndarray
    weights: np.ndarray
    quality: MeshQuality


def _signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _scale(points: np.ndarray) -> float:
    return max(float(np.max(np.abs(points))), 1.0)


def _check_array(points, what: str) -> np.ndarray:
    p = np.array(points, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise MeshError(f'{what} must be an array of shape (N, 2), '
                        f'got shape {p.shape}')
    if len(p) < MIN_VERTICES:
        raise MeshError(f'{what} needs at least {MIN_VERTICES} vertices, '
                        f'got {len(p)}')
    if not np.all(np.isfinite(p)):
        raise MeshError(f'{what} has non-finite coordinates')
    return p


class DiscreteCurve:
    """Closed counter-clockwise polygon in the plane.

    Immersed curves (e.g. Abresch-Langer curves) pass `immersed=True`,
    which skips the simplicity check; orientation then refers to the
    signed area, i.e. the winding-weighted enclosed area.
    """

    dimension = 1
    closed = True

    def __init__(self, vertices, *, immersed: bool = False):
        v = _check_array(vertices, 'curve')
        lengths = np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)
        if np.any(lengths <= _DEGENERATE_EPS * _scale(v)):
            raise MeshError('curve has coincident consecutive vertices')
        if not _signed_area(v) > 0:
            raise MeshError('curve is not counter-clockwise')
        if not immersed and not LinearRing(v).is_simple:
            raise MeshError('curve self-intersects')
        v.flags.writeable = False
        self._vertices = v
        self._immersed = bool(immersed)

    @classmethod
    def from_points(cls, points, *, immersed: bool = False):
        """Build a curve, reversing clockwise input while keeping
        vertex 0 in place."""
        v = _check_array(points, 'curve')
        if _signed_area(v) < 0:
            v = np.roll(v[::-1], 1, axis=0)
        return cls(v, immersed=immersed)

    @classmethod
    def circle(cls, radius: float, count: int, center=(0.0, 0.0)):
        theta = 2 * np.pi * np.arange(count) / count
        v = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
        return cls(v + np.asarray(center, dtype=float))

    @classmethod
    def ellipse(cls, a: float, b: float, count: int):
        theta = 2 * np.pi * np.arange(count) / count
        return cls(np.column_stack([a * np.cos(theta), b * np.sin(theta)]))

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def points(self) -> np.ndarray:
        return self._vertices

    @property
    def immersed(self) -> bool:
        return self._immersed

    @property
    def count(self) -> int:
        return len(self._vertices)

    def __len__(self):
        return len(self._vertices)

    def __repr__(self):
        return (f'<DiscreteCurve vertices={len(self)} '
                f'immersed={self._immersed}>')

    def with_points(self, points) -> 'DiscreteCurve':
        return DiscreteCurve(points, immersed=self._immersed)

    def edge_lengths(self) -> np.ndarray:
        v = self._vertices
        return np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)

    def signed_area(self) -> float:
        return _signed_area(self._vertices)


class ProfileSurface:
    """Surface of revolution about the z axis, given by its (r, z)
    profile."""

    dimension = 2

    def __init__(self, profile, topology: Topology = Topology.AXIS):
        p = _check_array(profile, 'profile')
        topology = Topology(topology)
        scale = _scale(p)
        if topology is Topology.AXIS:
            if abs(p[0, 0]) > 1e-9 * scale or abs(p[-1, 0]) > 1e-9 * scale:
                raise MeshError('axis profile must start and end on r = 0')
            p[0, 0] = p[-1, 0] = 0.0
            interior = p[1:-1, 0]
            edges = p[1:] - p[:-1]
        else:
            interior = p[:, 0]
            edges = np.roll(p, -1, axis=0) - p
        if np.any(interior <= 0):
            raise MeshError('profile leaves the half plane r > 0')
        if np.any(np.linalg.norm(edges, axis=1) <= _DEGENERATE_EPS * scale):
            raise MeshError('profile has coincident consecutive vertices')
        if not _signed_area(p) > 0:
            raise MeshError('profile is not counter-clockwise')
        if topology is Topology.AXIS:
            for edge, outward in ((edges[0], 1.0), (edges[-1], -1.0)):
                angle = math.atan2(abs(edge[1]), outward * edge[0])
                if angle > POLE_ANGLE_TOL:
                    raise MeshError(
                        f'profile meets the axis at {angle:.3g} rad from '
                        f'the horizontal (limit {POLE_ANGLE_TOL})')
            simple = LineString(p).is_simple
        else:
            simple = LinearRing(p).is_simple
        if not simple:
            raise MeshError('profile self-intersects')
        p.flags.writeable = False
        self._profile = p
        self._topology = topology

    @classmethod
    def sphere(cls, radius: float, count: int, center_z: float = 0.0):
        theta = np.linspace(-np.pi / 2, np.pi / 2, count)
        p = np.column_stack([radius * np.cos(theta),
                             center_z + radius * np.sin(theta)])
        p[0, 0] = p[-1, 0] = 0.0
        return cls(p, Topology.AXIS)

    @classmethod
    def torus(cls, center: float, tube: float, count: int):
        theta = 2 * np.pi * np.arange(count) / count
        p = np.column_stack([center + tube * np.cos(theta),
                             tube * np.sin(theta)])
        return cls(p, Topology.CLOSED)

    @property
    def profile(self) -> np.ndarray:
        return self._profile

    @property
    def points(self) -> np.ndarray:
        return self._profile

    @property
    def topology(self) -> Topology:
        return self._topology

    @property
    def closed(self) -> bool:
        return self._topology is Topology.CLOSED

    @property
    def immersed(self) -> bool:
        return False

    @property
    def count(self) -> int:
        return len(self._profile)

    def __len__(self):
        return len(self._profile)

    def __repr__(self):
        return (f'<ProfileSurface vertices={len(self)} '
                f'topology={self._topology.value}>')

    def with_points(self, points) -> 'ProfileSurface':
        return ProfileSurface(points, self._topology)

    def edge_lengths(self) -> np.ndarray:
        p = self._profile
        if self.closed:
            return np.linalg.norm(np.roll(p, -1, axis=0) - p, axis=1)
        return np.linalg.norm(p[1:] - p[:-1], axis=1)

    def cross_section(self) -> np.ndarray:
        """Boundary of the planar region swept by the profile and its
        mirror image across the axis (axis profiles only)."""
        p = self._profile
        mirror = p[-2:0:-1].copy()
        mirror[:, 0] *= -1
        return np.vstack([p, mirror])


Surface = Union[DiscreteCurve, ProfileSurface]


def _menger(prev, cur, nxt):
    a = cur - prev
    b = nxt - cur
    c = nxt - prev
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    la = np.linalg.norm(a, axis=1)
    lb = np.linalg.norm(b, axis=1)
    lc = np.linalg.norm(c, axis=1)
    degenerate = np.abs(cross) <= _DEGENERATE_EPS * la * lb
    with np.errstate(divide='ignore', invalid='ignore'):
        kappa = 2.0 * cross / (la * lb * lc)
    kappa[degenerate] = 0.0
    return kappa, int(np.count_nonzero(degenerate))


def _chord_normals(prev, nxt):
    t = nxt - prev
    t /= np.linalg.norm(t, axis=1)[:, None]
    return np.column_stack([t[:, 1], -t[:, 0]])


def _quality(lengths: np.ndarray, degenerate: int) -> MeshQuality:
    lo, hi = float(lengths.min()), float(lengths.max())
    return MeshQuality(lo, hi, lo / hi, degenerate)


def ring_measure(surface: ProfileSurface) -> np.ndarray:
    """Dual-cell integral of r ds at each profile vertex (r linear on
    each edge); 2 pi times this is the surface area element."""
    p = surface.profile
    r = p[:, 0]
    if surface.closed:
        r_next = np.roll(r, -1)
        lengths = surface.edge_lengths()
        right = lengths * (3 * r + r_next) / 8
        left = lengths * (3 * r_next + r) / 8
        return right + np.roll(left, 1)
    lengths = surface.edge_lengths()
    a = np.zeros(len(p))
    a[:-1] += lengths * (3 * r[:-1] + r[1:]) / 8
    a[1:] += lengths * (3 * r[1:] + r[:-1]) / 8
    return a


def curve_quantities(curve: DiscreteCurve) -> Quantities:
    x = curve.vertices
    prev = np.roll(x, 1, axis=0)
    nxt = np.roll(x, -1, axis=0)
    kappa, degenerate = _menger(prev, x, nxt)
    normals = _chord_normals(prev, nxt)
    lengths = curve.edge_lengths()
    weights = 0.5 * (lengths + np.roll(lengths, 1))
    support = np.einsum('ij,ij->i', x, normals)
    return Quantities(
        normals=normals,
        kappa=kappa,
        kappa_ring=None,
        mean_curvature=kappa,
        norm_a2=kappa ** 2,
        support=support,
        phi=kappa - 0.5 * support,
        weights=weights,
        quality=_quality(lengths, degenerate),
    )


def revolution_quantities(surface: ProfileSurface) -> Quantities:
    p = surface.profile
    if surface.closed:
        prev = np.roll(p, 1, axis=0)
        nxt = np.roll(p, -1, axis=0)
    else:
        # Ghost vertices mirrored across the axis close the poles smoothly.
        prev = np.vstack([[-p[1, 0], p[1, 1]], p[:-1]])
        nxt = np.vstack([p[1:], [-p[-2, 0], p[-2, 1]]])
    kappa, degenerate = _menger(prev, p, nxt)
    normals = _chord_normals(prev, nxt)
    r = p[:, 0]
    kappa_ring = np.empty_like(kappa)
    if surface.closed:
        kappa_ring[:] = normals[:, 0] / r
    else:
        kappa_ring[1:-1] = normals[1:-1, 0] / r[1:-1]
        kappa_ring[0] = kappa[0]
        kappa_ring[-1] = kappa[-1]
    mean = kappa + kappa_ring
    support = np.einsum('ij,ij->i', p, normals)
    return Quantities(
        normals=normals,
        kappa=kappa,
        kappa_ring=kappa_ring,
        mean_curvature=mean,
        norm_a2=kappa ** 2 + kappa_ring ** 2,
        support=support,
        phi=mean - 0.5 * support,
        weights=2 * np.pi * ring_measure(surface),
        quality=_quality(surface.edge_lengths(), degenerate),
    )


def quantities(surface: Surface) -> Quantities:
    """Normals, curvatures, rescaled mean curvature and quadrature
    weights at every vertex."""
    if isinstance(surface, DiscreteCurve):
        return curve_quantities(surface)
    if isinstance(surface, ProfileSurface):
        return revolution_quantities(surface)
    raise DomainError(f'unsupported surface type {type(surface).__name__}')


def mesh_quality(surface: Surface) -> MeshQuality:
    return _quality(surface.edge_lengths(), 0)


def _region_loops(surface: Surface):
    if isinstance(surface, DiscreteCurve):
        return [surface.vertices]
    if surface.closed:
        mirror = surface.profile[::-1].copy()
        mirror[:, 0] *= -1
        return [surface.profile, mirror]
    return [surface.cross_section()]


def _winding_numbers(points: np.ndarray, loop: np.ndarray) -> np.ndarray:
    d0 = loop[None, :, :] - points[:, None, :]
    d1 = np.roll(loop, -1, axis=0)[None, :, :] - points[:, None, :]
    cross = d0[..., 0] * d1[..., 1] - d0[..., 1] * d1[..., 0]
    dot = np.einsum('ijk,ijk->ij', d0, d1)
    return np.arctan2(cross, dot).sum(axis=1) / (2 * np.pi)


def contains(outer: Surface, inner: Surface,
             tol: Optional[float] = None) -> Containment:
    """Decide whether `inner` lies in the region enclosed by `outer`.

    Points closer than `tol` to the boundary of `outer` make the answer
    INDETERMINATE.  The region of an immersed curve is the set of points
    with non-zero winding number.
    """
    if isinstance(outer, DiscreteCurve) != isinstance(inner, DiscreteCurve):
        raise DomainError('cannot compare a curve with a surface')
    if tol is None:
        tol = 1e-9 * diameter(outer)
    loops = _region_loops(outer)
    pts = np.asarray(inner.points, dtype=float)
    geoms = shapely.points(pts)
    for loop in loops:
        ring = LinearRing(loop)
        if np.any(shapely.distance(ring, geoms) <= tol):
            return Containment.INDETERMINATE
    winding = sum(_winding_numbers(pts, loop) for loop in loops)
    if np.all(np.abs(winding) > 0.5):
        return Containment.INSIDE
    return Containment.NOT_INSIDE


def diameter(surface: Surface) -> float:
    if isinstance(surface, DiscreteCurve):
        pts = surface.vertices
    else:
        mirror = surface.profile.copy()
        mirror[:, 0] *= -1
        pts = np.vstack([surface.profile, mirror])
    return float(pdist(pts).max())


def centroid(surface: Surface) -> np.ndarray:
    """Area-weighted vertex average, in the coordinates of `points`."""
    w = quantities(surface).weights
    c = np.average(surface.points, axis=0, weights=w)
    if isinstance(surface, ProfileSurface):
        c[0] = 0.0
    return c


def _arclength(points: np.ndarray, closed: bool) -> np.ndarray:
    if closed:
        points = np.vstack([points, points[:1]])
    steps = np.linalg.norm(np.diff(points, axis=0), axis=1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def resample_arclength(surface: Surface,
                       count: Optional[int] = None) -> Surface:
    """Redistribute vertices uniformly in arclength along a cubic spline
    through the current vertices.  Vertex 0 stays in place."""
    count = surface.count if count is None else int(count)
    pts = surface.points
    s = _arclength(pts, surface.closed)
    if surface.closed:
        spline = CubicSpline(s, np.vstack([pts, pts[:1]]), axis=0,
                             bc_type='periodic')
        new = spline(np.arange(count) * (s[-1] / count))
    else:
        # r is odd and z even across a pole.
        r = CubicSpline(s, pts[:, 0], bc_type=((2, 0.0), (2, 0.0)))
        z = CubicSpline(s, pts[:, 1], bc_type=((1, 0.0), (1, 0.0)))
        u = np.linspace(0.0, s[-1], count)
        new = np.column_stack([r(u), z(u)])
        new[0, 0] = new[-1, 0] = 0.0
    return surface.with_points(new)


def normal_graph(surface: Surface, u: np.ndarray, s: float) -> Surface:
    """Move every vertex by s * u along its outward normal."""
    u = np.asarray(u, dtype=float)
    if u.shape != (surface.count,):
        raise DomainError(f'expected {surface.count} values, got {u.shape}')
    normals = quantities(surface).normals
    return surface.with_points(surface.points + s * u[:, None] * normals)


def translate(surface: Surface, offset: Sequence[float]) -> Surface:
    offset = np.asarray(offset, dtype=float)
    if isinstance(surface, ProfileSurface):
        if offset.shape != (3,) or offset[0] != 0 or offset[1] != 0:
            raise DomainError('a surface of revolution can only be '
                              'translated along its axis (0, 0, dz)')
        offset = np.array([0.0, offset[2]])
    return surface.with_points(surface.points + offset)


def rotate(surface: Surface, angle: float) -> Surface:
    if isinstance(surface, ProfileSurface):
        # Rotations about the axis leave the profile unchanged.
        return surface
    c, s = math.cos(angle), math.sin(angle)
    m = np.array([[c, -s], [s, c]])
    return surface.with_points(surface.points @ m.T)


def dilate(surface: Surface, factor: float) -> Surface:
    if not factor > 0:
        raise DomainError(f'dilation factor must be positive, got {factor}')
    return surface.with_points(surface.points * factor)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    return max(directed_hausdorff(a, b)[0], directed_hausdorff(b, a)[0])
