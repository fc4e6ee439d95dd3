""" _stability.py - the stability operator of a shrinker

L = Lap + |A|^2 + 1/2 where Lap = (1/rho) div(rho grad .) is the drift
Laplacian with Gaussian density rho = exp(-|x|^2/4).  On a surface of
revolution only rotationally symmetric functions are considered, so L
acts on functions of the profile vertices.
"""

import dataclasses
import logging
import math
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lu_factor, lu_solve

from ._config import EntropyOptions
from ._entropy import entropy_sup
from ._errors import (
    ConvergenceError, DomainError, MeshError, PerturbationError,
)
from ._flow import _laplacian
from ._geometry import (
    Containment, DiscreteCurve, contains, normal_graph, quantities,
    ring_measure,
)


__all__ = (
    'StabilityOperator',
    'EigenPair',
    'LinearizationCheck',
    'Perturbation',
    'assemble_operator',
    'lowest_eigenpair',
    'linearization_check',
    'perturb_inward',
)


logger = logging.getLogger(__name__)


# An eigenvalue at most this far above one is treated as the round case.
EIGENVALUE_MARGIN = 1e-3

ENTROPY_DROP = 1e-6

# max |phi| below which a surface is accepted as a shrinker.
SHRINKER_TOL = 1e-4

# First trial amplitude, in units of the shortest edge.
INITIAL_STEP = 1e-2


@dataclasses.dataclass(frozen=True, eq=False)
class StabilityOperator:
    """Sparse matrix of L together with the Gaussian vertex weights in
    which it is self-adjoint."""
    matrix: sp.csr_matrix
    weights: np.ndarray
    potential: np.ndarray

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(np.dot(self.weights * u, v))


@dataclasses.dataclass(frozen=True, eq=False)
class EigenPair:
    mu: float
    u: np.ndarray
    residual: float
    iterations: int
    symmetric_restriction: bool = False


@dataclasses.dataclass(frozen=True, eq=False)
class LinearizationCheck:
    residual: float
    derivative: np.ndarray
    image: np.ndarray


@dataclasses.dataclass(frozen=True, eq=False)
class Perturbation:
    surface: object
    s: float
    lambda_shrinker: float
    lambda_perturbed: float
    min_phi: float
    containment: Containment
    attempts: int
    mu: float


def assemble_operator(surface) -> StabilityOperator:
    pts = surface.points
    rho = np.exp(-np.einsum('ij,ij->i', pts, pts) / 4)
    lengths = surface.edge_lengths()
    if surface.closed:
        mid = 0.5 * (pts + np.roll(pts, -1, axis=0))
    else:
        mid = 0.5 * (pts[1:] + pts[:-1])
    rho_mid = np.exp(-np.einsum('ij,ij->i', mid, mid) / 4)
    if isinstance(surface, DiscreteCurve):
        measure = 0.5 * (lengths + np.roll(lengths, 1))
        flux = rho_mid / lengths
    else:
        r = pts[:, 0]
        measure = ring_measure(surface)
        r_mid = 0.5 * (r + np.roll(r, -1)) if surface.closed else (
            0.5 * (r[1:] + r[:-1]))
        flux = r_mid * rho_mid / lengths
    scale = measure * rho
    if surface.closed:
        up = flux / scale
        down = np.roll(flux, 1) / scale
    else:
        up = np.zeros(len(pts))
        down = np.zeros(len(pts))
        up[:-1] = flux / scale[:-1]
        down[1:] = flux / scale[1:]
    potential = quantities(surface).norm_a2 + 0.5
    matrix = _laplacian(up, down, surface.closed, -potential).tocsr()
    if not isinstance(surface, DiscreteCurve):
        scale = 2 * np.pi * scale
    return StabilityOperator(matrix, scale, potential)


def lowest_eigenpair(surface, tol: float = 1e-10, max_iter: int = 10_000,
                     shrinker_tol: float = SHRINKER_TOL) -> EigenPair:
    """Largest eigenvalue mu of L (the lowest of -L) and its positive
    eigenfunction, by shifted inverse power iteration.

    The shift 2 (max|A|^2 + 1/2) lies above the spectrum, so iteration
    with (shift - L)^-1 converges to the top eigenpair.
    """
    q = quantities(surface)
    worst = float(np.max(np.abs(q.phi)))
    if worst >= shrinker_tol:
        raise DomainError(f'surface is not numerically a shrinker: '
                          f'max |phi| = {worst:.3g}')
    op = assemble_operator(surface)
    shift = 2.0 * float(op.potential.max())
    lu = lu_factor(shift * np.eye(surface.count) - op.dense())
    u = np.ones(surface.count)
    residual = math.inf
    mu = math.nan
    for iteration in range(1, max_iter + 1):
        u = lu_solve(lu, u)
        u /= u[np.argmax(np.abs(u))]
        lu_u = op.apply(u)
        mu = op.inner(u, lu_u) / op.inner(u, u)
        residual = float(np.max(np.abs(lu_u - mu * u)))
        if residual < tol:
            break
    else:
        raise ConvergenceError(
            f'inverse iteration did not converge in {max_iter} iterations',
            {'iterations': max_iter, 'residual': residual, 'mu': mu})
    if np.any(u <= 0):
        raise ConvergenceError(
            'eigenfunction changes sign; the discretization is too coarse',
            {'iterations': iteration, 'mu': mu})
    u.flags.writeable = False
    logger.info('lowest eigenpair: mu = %.12g after %d iterations '
                '(residual %.3g)', mu, iteration, residual)
    return EigenPair(mu, u, residual, iteration,
                     not isinstance(surface, DiscreteCurve))


def linearization_check(surface, u: np.ndarray,
                        h_fd: float = 1e-4) -> LinearizationCheck:
    """Compare the central difference of phi along the normal graphs
    x + s u n at s = +-h_fd with -L u."""
    try:
        plus = normal_graph(surface, u, h_fd)
        minus = normal_graph(surface, u, -h_fd)
    except MeshError as exc:
        raise DomainError(f'normal graph with step {h_fd} is not a valid '
                          f'surface: {exc}') from exc
    derivative = (quantities(plus).phi - quantities(minus).phi) / (2 * h_fd)
    image = assemble_operator(surface).apply(np.asarray(u, dtype=float))
    residual = float(np.max(np.abs(derivative + image)))
    return LinearizationCheck(residual, derivative, image)


def perturb_inward(surface, eigen: Optional[EigenPair] = None, *,
                   override: bool = False,
                   initial_s: Optional[float] = None,
                   min_abs_s: float = 1e-8,
                   shrinker_tol: float = SHRINKER_TOL,
                   options: EntropyOptions = EntropyOptions()
                   ) -> Perturbation:
    """Push a shrinker inward along its lowest eigenfunction.

    Starting from s = initial_s / max u, |s| is halved until the graph
    has positive phi, lies inside the shrinker and has strictly smaller
    entropy.  The default initial_s is -1e-2 times the shortest edge.
    """
    if eigen is None:
        eigen = lowest_eigenpair(surface, shrinker_tol=shrinker_tol)
    if initial_s is None:
        initial_s = -INITIAL_STEP * float(surface.edge_lengths().min())
    if eigen.mu <= 1 + EIGENVALUE_MARGIN and not override:
        raise PerturbationError(
            f'refusing to perturb: mu = {eigen.mu:.12g} does not exceed '
            f'1 + {EIGENVALUE_MARGIN}', None, {'mu': eigen.mu})
    if not initial_s < 0:
        raise DomainError(f'initial_s must be negative, got {initial_s}')
    lam_sigma = entropy_sup(surface, options).value
    u = np.asarray(eigen.u)
    s = initial_s / float(np.max(np.abs(u)))
    failed = None
    attempts = 0
    while abs(s) >= min_abs_s:
        attempts += 1
        try:
            gamma = normal_graph(surface, u, s)
        except MeshError as exc:
            logger.debug('s = %.3g: invalid surface (%s)', s, exc)
            failed = 2
        else:
            min_phi = float(quantities(gamma).phi.min())
            inside = contains(surface, gamma)
            if not min_phi > 0:
                failed = 3
            elif inside is not Containment.INSIDE:
                failed = 2
            else:
                lam_gamma = entropy_sup(gamma, options).value
                if lam_gamma < lam_sigma - ENTROPY_DROP:
                    logger.info('perturbation accepted at s = %.6g: '
                                'lambda %.12g -> %.12g', s, lam_sigma,
                                lam_gamma)
                    return Perturbation(gamma, s, lam_sigma, lam_gamma,
                                        min_phi, inside, attempts, eigen.mu)
                failed = 1
            logger.debug('s = %.3g rejected by property (%d)', s, failed)
        s *= 0.5
    raise PerturbationError(
        f'no admissible perturbation down to |s| = {min_abs_s}; '
        f'property ({failed}) failed last', failed,
        {'attempts': attempts, 'lambda': lam_sigma, 'mu': eigen.mu})
