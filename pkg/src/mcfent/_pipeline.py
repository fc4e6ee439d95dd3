""" _pipeline.py - end-to-end experiments: entropy table and the perturb,
flow, blow-up pipeline

A pipeline run takes a compact shrinker Sigma through the stages

    shoot -> entropy -> eigenpair -> perturb -> flow -> ratio -> tangent

and records the entropy chain

    lambda(S^n) <= lambda(tangent) <= lambda(Gamma) < lambda(Sigma)

where Gamma is the inward perturbation of Sigma whose rescaled flow
becomes singular.
"""

import contextlib
import csv
import dataclasses
import io
import logging
import math
import re
from typing import List, Optional, Tuple

import numpy as np

from ._config import EntropyOptions, FlowParams, ShootingParams
from ._entropy import (
    entropy_sup, lambda_cylinder, lambda_sphere, simons_cone_entropy,
    simons_cone_entropy_quadrature,
)
from ._errors import ConvergenceError, DomainError, MCFError, PipelineError
from ._flow import (
    FlowKind, SingularityEvent, blowup_time_bound, detect_singularity,
    rescaled_to_mcf, run_flow, tangent_rescalings,
)
from ._properties import CheckReport, check_ratio_bound, check_tangent_roundness
from ._shrinkers import (
    AnalyticShape, abresch_langer, admissible_al, angenent_torus,
    make_standard,
)
from ._stability import SHRINKER_TOL, lowest_eigenpair, perturb_inward
from ._surfaceio import format_number


__all__ = (
    'PipelineParams',
    'PipelineReport',
    'parse_shrinker',
    'run_pipeline',
    'make_table',
)


logger = logging.getLogger(__name__)


# Slack for comparing exact entropies with numerical lower bounds.
CHAIN_TOL = 1e-3

# Smallest entropy gap above the round sphere that counts as a gap.
GAP_MIN = 1e-2

_AL_PATTERN = re.compile(r'^al[(:]?\s*(\d+)\s*,\s*(\d+)\s*\)?$')


@dataclasses.dataclass(frozen=True)
class PipelineParams:
    flow: FlowParams = dataclasses.field(default_factory=FlowParams)
    shooting: ShootingParams = dataclasses.field(
        default_factory=ShootingParams)
    entropy: EntropyOptions = dataclasses.field(
        default_factory=EntropyOptions)
    levels: int = 6
    extra_time: float = 1.0
    initial_s: Optional[float] = -0.1
    shrinker_tol: Optional[float] = None

    def __post_init__(self):
        if self.levels < 1:
            raise DomainError('levels must be at least 1')


@dataclasses.dataclass(eq=False)
class PipelineReport:
    shrinker: str
    status: str = 'RUNNING'
    failed_stage: Optional[str] = None
    dimension: Optional[int] = None
    vertices: Optional[int] = None
    shooting_parameter: Optional[float] = None
    shooting_residual: Optional[float] = None
    discrete_residual: Optional[float] = None
    shrinker_tol: Optional[float] = None
    lambda_shrinker: Optional[float] = None
    mu: Optional[float] = None
    s: Optional[float] = None
    lambda_perturbed: Optional[float] = None
    min_phi: Optional[float] = None
    c1: Optional[float] = None
    t_c: Optional[float] = None
    tau: Optional[float] = None
    tau_within_bound: Optional[bool] = None
    singular_point: Optional[Tuple[float, ...]] = None
    ratio_constant: Optional[float] = None
    tangent_type: Optional[str] = None
    tangent_radius: Optional[float] = None
    lambda_tangent: Optional[float] = None
    lambda_round: Optional[float] = None
    gap: Optional[float] = None
    chain_holds: Optional[bool] = None
    rigidity: Optional[bool] = None
    checks: List[CheckReport] = dataclasses.field(default_factory=list)

    def lines(self) -> List[str]:
        out = []
        for field in dataclasses.fields(self):
            if field.name == 'checks':
                continue
            value = getattr(self, field.name)
            if value is None:
                continue
            if isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, float):
                value = format_number(value)
            elif isinstance(value, tuple):
                value = ' '.join(format_number(v) for v in value)
            out.append(f'{field.name} = {value}')
        for check in self.checks:
            out.extend(check.lines())
        return out

    def text(self) -> str:
        return '\n'.join(self.lines()) + '\n'


def parse_shrinker(name: str) -> Tuple[str, Optional[Tuple[int, int]]]:
    """'torus', 'sphere', 'circle' or 'al(p,q)' (also 'al:p,q')."""
    key = name.strip().lower()
    if key in ('torus', 'sphere', 'circle'):
        return key, None
    match = _AL_PATTERN.match(key)
    if match is None:
        raise DomainError(f"unknown shrinker '{name}'; expected torus, "
                          f"sphere, circle or al(p,q)")
    p, q = int(match.group(1)), int(match.group(2))
    if p != 1 and not admissible_al(p, q):
        raise DomainError(f'(p, q) = ({p}, {q}) is not admissible: need '
                          f'gcd(p, q) = 1 and sqrt(2) < q/p < 2')
    return 'al', (p, q)


def _gap_check(gap: float) -> CheckReport:
    margin = GAP_MIN - gap
    return CheckReport('gap', bool(margin <= 0.0), margin, 0.0,
                       parameters={'gap': gap, 'minimum': GAP_MIN})


@contextlib.contextmanager
def _stage(report: PipelineReport, name: str):
    logger.info('pipeline %s: stage %s', report.shrinker, name)
    try:
        yield
    except MCFError as exc:
        report.status = 'FAILED'
        report.failed_stage = name
        logger.error('pipeline %s: stage %s failed: %s', report.shrinker,
                     name, exc)
        raise PipelineError(name, report, str(exc)) from exc


def _shoot(kind, pq, params: PipelineParams, report: PipelineReport):
    resolution = params.shooting.resolution
    if kind == 'sphere':
        return make_standard(AnalyticShape.sphere(2), resolution)
    if kind == 'circle':
        return make_standard(AnalyticShape.sphere(1), resolution)
    if kind == 'torus':
        result = angenent_torus(params.shooting)
    else:
        result = abresch_langer(pq[0], pq[1], params.shooting)
    report.shooting_parameter = result.parameter
    report.shooting_residual = result.residual
    report.discrete_residual = result.discrete_residual
    return result.surface


def run_pipeline(shrinker: str,
                 params: PipelineParams = PipelineParams()
                 ) -> PipelineReport:
    """Run every stage for `shrinker`.  A failing stage raises
    PipelineError carrying the partial report."""
    kind, pq = parse_shrinker(shrinker)
    report = PipelineReport(shrinker)

    with _stage(report, 'shoot'):
        sigma = _shoot(kind, pq, params, report)
        n = sigma.dimension
        report.dimension = n
        report.vertices = sigma.count

    with _stage(report, 'entropy'):
        report.lambda_shrinker = entropy_sup(sigma, params.entropy).value
        report.lambda_round = lambda_sphere(n)
        report.rigidity = report.lambda_shrinker < min(
            lambda_sphere(n - 1), 1.5)

    with _stage(report, 'eigenpair'):
        # A shot shrinker is exact up to the ODE residual; its polygon
        # carries the discretization error on top.
        tol = params.shrinker_tol
        if tol is None:
            tol = max(SHRINKER_TOL, 2 * (report.discrete_residual or 0.0))
        report.shrinker_tol = tol
        eigen = lowest_eigenpair(sigma, shrinker_tol=tol)
        report.mu = eigen.mu

    with _stage(report, 'perturb'):
        perturbation = perturb_inward(
            sigma, eigen, override=kind in ('sphere', 'circle'),
            initial_s=params.initial_s, options=params.entropy)
        gamma = perturbation.surface
        report.s = perturbation.s
        report.lambda_perturbed = perturbation.lambda_perturbed
        report.min_phi = perturbation.min_phi

    with _stage(report, 'flow'):
        pts = gamma.points
        report.c1 = 0.5 * float(np.sqrt(np.max(np.einsum('ij,ij->i', pts,
                                                         pts))))
        report.t_c = blowup_time_bound(report.min_phi, report.c1, n)
        flow_params = dataclasses.replace(
            params.flow, t_max=report.t_c + params.extra_time)
        trace = run_flow(gamma, FlowKind.RESCALED, flow_params)
        event = detect_singularity(trace)
        if event is None:
            raise ConvergenceError(
                f'no singularity before t = {flow_params.t_max:.6g}',
                {'t_c': report.t_c})
        report.tau = event.tau
        report.tau_within_bound = event.tau <= report.t_c
        report.singular_point = tuple(float(v) for v in event.point)

    with _stage(report, 'ratio'):
        ratio = check_ratio_bound(trace)
        report.checks.append(ratio)
        report.ratio_constant = ratio.parameters['C']

    with _stage(report, 'tangent'):
        mcf = rescaled_to_mcf(trace)
        tau_mcf = -math.exp(-event.tau)
        point = math.exp(-0.5 * event.tau) * np.asarray(event.point)
        mcf_event = SingularityEvent(tau_mcf, point, event.fit_quality,
                                     event.reason, mcf.last.t, event.compact)
        h_max = math.sqrt(tau_mcf - mcf.samples[0].t)
        scales = [h_max * 2.0 ** -i for i in range(1, params.levels + 1)]
        ts = tangent_rescalings(mcf, mcf_event, scales)
        roundness = check_tangent_roundness(
            ts, n, math.sqrt(report.ratio_constant), report.c1)
        report.checks.append(roundness)
        k = roundness.parameters['k']
        report.tangent_type = f'S^{k}xR^{n - k}'
        if roundness.subchecks:
            report.tangent_radius = roundness.subchecks[0].parameters.get(
                'fitted')

    report.lambda_tangent = lambda_cylinder(k, n - k)
    report.gap = report.lambda_shrinker - report.lambda_round
    report.checks.append(_gap_check(report.gap))
    report.chain_holds = bool(
        report.lambda_round <= report.lambda_tangent + 1e-12
        and report.lambda_tangent <= report.lambda_perturbed + CHAIN_TOL
        and report.lambda_perturbed < report.lambda_shrinker)
    ok = (report.chain_holds and report.tau_within_bound
          and all(check.passed for check in report.checks))
    report.status = 'OK' if ok else 'FAILED'
    logger.info('pipeline %s finished: %s, gap %.6g', shrinker,
                report.status, report.gap)
    return report


def _row(obj, n_or_k, value, method, error, note='') -> List[str]:
    return [obj, str(n_or_k), format_number(value), method,
            format_number(error), note]


def make_table(max_n: int = 8, max_k: int = 12) -> str:
    """CSV of closed-form entropies: round spheres, generalized
    cylinders, hyperplanes and Simons-type cones."""
    if max_n < 1 or max_k < 1:
        raise DomainError('max_n and max_k must be at least 1')
    rows = []
    for n in range(1, max_n + 1):
        rows.append(_row(f'S^{n}', n, lambda_sphere(n), 'closed-form', 0.0))
    for n in range(2, max_n + 1):
        for k in range(1, n):
            rows.append(_row(f'S^{k}xR^{n - k}', n, lambda_cylinder(k, n - k),
                             'closed-form', 0.0))
    rows.append(_row('R^n', 'n', 1.0, 'closed-form', 0.0))
    flagged = False
    for k in range(1, max_k + 1):
        value = simons_cone_entropy(k)
        quadrature, _ = simons_cone_entropy_quadrature(k)
        # Agreement below 1e-12 is reported as 1e-12.
        error = max(abs(value - quadrature), 1e-12)
        note = ''
        if not flagged and value < lambda_sphere(1):
            note = f'< lambda(S^1xR^{2 * k})'
            flagged = True
        rows.append(_row(f'C({k},{k})', k, value, 'closed-form',
                         error, note))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(['object', 'n_or_k', 'entropy', 'method',
                     'error_estimate', 'note'])
    writer.writerows(rows)
    return buf.getvalue()
