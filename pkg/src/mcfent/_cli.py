""" _cli.py - the mcfent command line

Settings are resolved with the precedence

    built-in defaults < environment < MCFENT_CONFIG file
    < --config FILE < flags

Exit codes:

code  meaning
-----------------------------------------------------------------
0     success
1     a check failed (verify, pipeline report marked FAILED)
2     usage error, invalid surface or operation precondition
3     numerical non-convergence
"""

import argparse
import dataclasses
import logging
import math
import os
import sys
from typing import Any, Callable, Dict, List, Mapping, Optional, Tuple

from ._config import (
    ENV_LOG_LEVEL, EntropyOptions, FlowParams, Scheme, ShootingParams,
    config_from_env, configure_logging, default_workers, load_config,
)
from ._entropy import entropy_sup
from ._errors import (
    ConvergenceError, DomainError, MCFError, PipelineError,
)
from ._flow import (
    FlowKind, detect_singularity, run_flow, tangent_rescalings,
)
from ._geometry import DiscreteCurve, resample_arclength
from ._pipeline import PipelineParams, make_table, run_pipeline
from ._properties import (
    CheckReport, check_entropy_monotone, check_monotonicity_suite,
    check_ratio_bound, check_simons_identities, check_tangent_roundness,
)
from ._shrinkers import AnalyticShape, abresch_langer, angenent_torus
from ._stability import perturb_inward
from ._surfaceio import (
    format_number, read_snapshots, read_surface, write_snapshots,
    write_surface, write_trace_csv,
)
from ._sweeps import run_sweep


__all__ = 'main',


logger = logging.getLogger(__name__)


def _flag(value: str) -> bool:
    if value.lower() in ('true', 'yes', '1', 'on'):
        return True
    if value.lower() in ('false', 'no', '0', 'off'):
        return False
    raise ValueError(f'expected true or false, got {value!r}')


def _optional_float(value: str) -> Optional[float]:
    return float(value) if value.strip() else None


# name -> (converter, default); every name may appear in config files.
OPTIONS: Dict[str, Tuple[Callable[[str], Any], str]] = {
    'log_level': (str, 'WARNING'),
    'workers': (int, '1'),
    'out': (str, '.'),
    'dt': (float, '1e-3'),
    'scheme': (Scheme, 'semi-implicit'),
    'kind': (FlowKind, 'rescaled'),
    't_max': (float, '10'),
    'until_singularity': (_flag, 'false'),
    'trace': (str, ''),
    'snapshots_every': (int, '0'),
    'redistribute': (_flag, 'true'),
    'a_max_factor': (float, '50'),
    'entropy_every': (int, '0'),
    'resolution': (int, '512'),
    'step': (float, '1e-4'),
    'probes': (int, '8'),
    'scales': (int, '5'),
    'max_n': (int, '8'),
    'max_k': (int, '12'),
    'levels': (int, '6'),
    'override': (_flag, 'false'),
    'initial_s': (_optional_float, ''),
    'shrinker_tol': (float, '1e-4'),
    'suite': (str, 'all'),
    'simons_t': (float, '0.02'),
}

SUITES = ('simons', 'monotone', 'ratio', 'tangent', 'all')

# t_max used by --until-singularity.
_UNBOUNDED = 1e6


def resolve_settings(args: argparse.Namespace,
                     environ: Optional[Mapping[str, str]] = None
                     ) -> Dict[str, Any]:
    environ = os.environ if environ is None else environ
    values = {name: default for name, (_, default) in OPTIONS.items()}
    values['log_level'] = environ.get(ENV_LOG_LEVEL) or values['log_level']
    values['workers'] = str(default_workers(environ))
    sources = [config_from_env(environ)]
    if getattr(args, 'config', None):
        sources.append(load_config(args.config))
    for source in sources:
        for key, value in source.items():
            name = key.replace('-', '_')
            if name not in OPTIONS:
                raise DomainError(f"unknown configuration key '{key}'")
            values[name] = value
    for name in OPTIONS:
        value = getattr(args, name, None)
        if value is not None:
            values[name] = value
    settings = {}
    for name, (convert, _) in OPTIONS.items():
        try:
            settings[name] = convert(values[name])
        except ValueError as exc:
            raise DomainError(f"bad value for '{name}': {exc}") from None
    if settings['suite'] not in SUITES:
        raise DomainError(f"unknown suite '{settings['suite']}'")
    return settings


def _flow_params(settings, **overrides) -> FlowParams:
    values = dict(
        dt=settings['dt'],
        scheme=settings['scheme'],
        redistribute=settings['redistribute'],
        t_max=settings['t_max'],
        a_max_factor=settings['a_max_factor'],
        entropy_every=settings['entropy_every'],
    )
    values.update(overrides)
    return FlowParams(**values)


def _entropy_options(settings) -> EntropyOptions:
    return EntropyOptions(probes=settings['probes'],
                          scales=settings['scales'])


def _output(settings, name: str) -> str:
    os.makedirs(settings['out'], exist_ok=True)
    return os.path.join(settings['out'], name)


def _write_text(path: str, lines: List[str]) -> None:
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write('\n'.join(lines) + '\n')


def _emit(settings, name: str, lines: List[str]) -> None:
    _write_text(_output(settings, name), lines)
    for line in lines:
        print(line)


def _discrete(path: str):
    surface = read_surface(path).surface
    if isinstance(surface, AnalyticShape):
        raise DomainError(f'{path}: an analytic descriptor cannot be '
                          f'evolved; discretize it first')
    return surface


def _cmd_table(args, settings) -> int:
    text = make_table(settings['max_n'], settings['max_k'])
    with open(_output(settings, 'table.csv'), 'w', encoding='utf-8',
              newline='') as f:
        f.write(text)
    sys.stdout.write(text)
    return 0


def _entropy_task(path: str, probes: int, scales: int):
    surface = read_surface(path).surface
    return entropy_sup(surface, EntropyOptions(probes=probes, scales=scales))


def _cmd_entropy(args, settings) -> int:
    tasks = {path: (path, settings['probes'], settings['scales'])
             for path in args.inputs}
    results = run_sweep(_entropy_task, tasks, settings['workers'])
    lines = []
    for path, result in results.items():
        lines += [
            f'{path}.value = {format_number(result.value)}',
            f'{path}.x0 = '
            + ' '.join(format_number(c) for c in result.argmax.x0),
            f'{path}.t0 = {format_number(result.argmax.t0)}',
            f'{path}.status = {result.status.value}',
            f'{path}.axis_restricted = '
            f'{str(result.axis_restricted).lower()}',
        ]
    _emit(settings, 'entropy.txt', lines)
    return 0


def _cmd_flow(args, settings) -> int:
    surface = _discrete(args.input)
    t_max = _UNBOUNDED if settings['until_singularity'] else settings['t_max']
    every = settings['snapshots_every']
    params = _flow_params(settings, t_max=t_max,
                          snapshot_every=max(every, 1))
    trace = run_flow(surface, settings['kind'], params)
    write_trace_csv(trace, settings['trace'] or _output(settings,
                                                        'trace.csv'))
    if every > 0:
        write_snapshots(trace, _output(settings, 'snapshots'))
    write_surface(_output(settings, 'final.surf'), trace.last.surface,
                  name='final', provenance=f'{trace.kind.value} flow of '
                  f'{args.input}', meta={'t': float(trace.last.t)})
    lines = [f'stop_reason = {trace.stop_reason.value}',
             f't_end = {format_number(trace.last.t)}',
             f'snapshots = {len(trace)}']
    if settings['until_singularity']:
        event = detect_singularity(trace)
        if event is None:
            raise ConvergenceError('the flow did not become singular')
        lines += [f'tau = {format_number(event.tau)}',
                  'point = ' + ' '.join(format_number(v)
                                        for v in event.point),
                  f'compact = {str(event.compact).lower()}',
                  f'fit_quality = {format_number(event.fit_quality)}']
    _emit(settings, 'flow.txt', lines)
    return 0


def _shoot_task(name: str, params: ShootingParams):
    if name == 'torus':
        return angenent_torus(params)
    p, q = (int(v) for v in name[3:].split('_'))
    return abresch_langer(p, q, params)


def _cmd_shoot(args, settings) -> int:
    params = ShootingParams(step=settings['step'],
                            resolution=settings['resolution'])
    tasks = {}
    for pq in args.al or ():
        try:
            p, q = (int(v) for v in pq.split(','))
        except ValueError:
            raise DomainError(f"--al expects P,Q, got '{pq}'") from None
        tasks[f'al_{p}_{q}'] = (f'al_{p}_{q}', params)
    if args.torus:
        tasks['torus'] = ('torus', params)
    if not tasks:
        raise DomainError('nothing to shoot; pass --al P,Q or --torus')
    results = run_sweep(_shoot_task, tasks, settings['workers'])
    lines = []
    for key, result in results.items():
        write_surface(_output(settings, f'{key}.surf'), result.surface,
                      name=key, provenance='shooting', meta={
                          'parameter': result.parameter,
                          'residual': result.residual,
                          'discrete_residual': result.discrete_residual})
        lines += [f'{key}.parameter = {format_number(result.parameter)}',
                  f'{key}.residual = {format_number(result.residual)}',
                  f'{key}.discrete_residual = '
                  f'{format_number(result.discrete_residual)}',
                  f'{key}.vertices = {result.surface.count}']
    _emit(settings, 'shoot.txt', lines)
    return 0


def _cmd_perturb(args, settings) -> int:
    surface = _discrete(args.input)
    result = perturb_inward(surface, override=settings['override'],
                            initial_s=settings['initial_s'],
                            shrinker_tol=settings['shrinker_tol'],
                            options=_entropy_options(settings))
    write_surface(_output(settings, 'perturbed.surf'), result.surface,
                  name='perturbed', provenance=f'inward perturbation of '
                  f'{args.input}', meta={'s': result.s})
    _emit(settings, 'perturb.txt', [
        f'mu = {format_number(result.mu)}',
        f's = {format_number(result.s)}',
        f'lambda_shrinker = {format_number(result.lambda_shrinker)}',
        f'lambda_perturbed = {format_number(result.lambda_perturbed)}',
        f'min_phi = {format_number(result.min_phi)}',
        f'containment = {result.containment.value}',
        f'attempts = {result.attempts}',
    ])
    return 0


def _simons_ladder(surface, settings) -> CheckReport:
    base = max(32, min(surface.count, 128))
    factor = 0.25 if isinstance(surface, DiscreteCurve) else 0.1
    traces = []
    for count in (base, 2 * base, 4 * base):
        refined = resample_arclength(surface, count)
        h = float(refined.edge_lengths().max())
        params = FlowParams(dt=factor * h * h, scheme=Scheme.EXPLICIT,
                            redistribute=False, curvature_cfl=None,
                            t_max=settings['simons_t'])
        traces.append(run_flow(refined, FlowKind.RESCALED, params))
    return check_simons_identities(traces)


def _tangent(trace, settings) -> CheckReport:
    event = detect_singularity(trace)
    if event is None:
        raise DomainError('the flow did not become singular')
    h_max = math.sqrt(event.tau - trace.samples[0].t)
    scales = [h_max * 2.0 ** -i for i in range(1, settings['levels'] + 1)]
    ts = tangent_rescalings(trace, event, scales)
    return check_tangent_roundness(ts, ts.dimension)


def _verify_surface(surface, suites, settings) -> List[CheckReport]:
    reports = []
    if 'simons' in suites:
        reports.append(_simons_ladder(surface, settings))
    if 'monotone' in suites or 'ratio' in suites:
        trace = run_flow(surface, FlowKind.RESCALED, _flow_params(settings))
        if 'monotone' in suites:
            reports.append(check_monotonicity_suite(trace))
        if 'ratio' in suites:
            reports.append(_ratio(trace, strict=len(suites) == 1))
    if 'monotone' in suites and isinstance(surface, DiscreteCurve):
        mcf = run_flow(surface, FlowKind.MCF, _flow_params(settings))
        reports.append(check_entropy_monotone(mcf))
    if 'tangent' in suites:
        mcf = run_flow(surface, FlowKind.MCF,
                       _flow_params(settings, t_max=_UNBOUNDED))
        reports.append(_tangent(mcf, settings))
    return reports


def _ratio(trace, strict: bool) -> CheckReport:
    try:
        return check_ratio_bound(trace)
    except DomainError as exc:
        if strict:
            raise
        return CheckReport('ratio', True, 0.0, 0.0, applicable=False,
                           notes=(str(exc),))


def _verify_trace(trace, suites) -> List[CheckReport]:
    reports = []
    rescaled = trace.kind is FlowKind.RESCALED
    tracked = (rescaled and trace.params.scheme is Scheme.EXPLICIT
               and not trace.params.redistribute)
    if 'simons' in suites and (tracked or len(suites) == 1):
        reports.append(check_simons_identities(trace))
    if 'monotone' in suites:
        reports.append(check_monotonicity_suite(trace))
        if not rescaled and isinstance(trace.samples[0].surface,
                                       DiscreteCurve):
            reports.append(check_entropy_monotone(trace))
    if 'ratio' in suites and (rescaled or len(suites) == 1):
        reports.append(_ratio(trace, strict=len(suites) == 1))
    return reports


def _cmd_verify(args, settings) -> int:
    suite = settings['suite']
    suites = set(SUITES[:-1]) if suite == 'all' else {suite}
    if os.path.isdir(args.input):
        trace = read_snapshots(args.input)
        reports = _verify_trace(trace, suites)
        if 'tangent' in suites and (trace.kind is FlowKind.MCF
                                    and trace.singular or suite != 'all'):
            reports.append(_tangent(trace, settings))
    else:
        reports = _verify_surface(_discrete(args.input), suites, settings)
    passed = all(report.passed for report in reports)
    lines = [f'passed = {str(passed).lower()}']
    for report in reports:
        lines += report.lines()
    _emit(settings, 'verify.txt', lines)
    return 0 if passed else 1


def _cmd_pipeline(args, settings) -> int:
    params = PipelineParams(
        flow=_flow_params(settings),
        shooting=ShootingParams(step=settings['step'],
                                resolution=settings['resolution']),
        entropy=_entropy_options(settings),
        levels=settings['levels'])
    if settings['initial_s'] is not None:
        params = dataclasses.replace(params, initial_s=settings['initial_s'])
    try:
        report = run_pipeline(args.shrinker, params)
    except PipelineError as exc:
        _emit(settings, 'pipeline.txt', exc.report.lines())
        raise
    _emit(settings, 'pipeline.txt', report.lines())
    return 0 if report.status == 'OK' else 1


def _add_common(parser):
    parser.add_argument('--config', metavar='FILE',
                        help='key = value file with default settings')
    parser.add_argument('--log-level', dest='log_level', metavar='LEVEL')
    parser.add_argument('--workers', metavar='N')
    parser.add_argument('--out', metavar='DIR',
                        help='directory for output files (default .)')


def _add_flow(parser):
    parser.add_argument('--dt', metavar='DT')
    parser.add_argument('--scheme', choices=[s.value for s in Scheme])
    parser.add_argument('--t-max', dest='t_max', metavar='T')
    parser.add_argument('--a-max-factor', dest='a_max_factor',
                        metavar='F')
    parser.add_argument('--no-redistribute', dest='redistribute',
                        action='store_const', const='false')


def _add_entropy(parser):
    parser.add_argument('--probes', metavar='N')
    parser.add_argument('--scales', metavar='N')


def _add_shooting(parser):
    parser.add_argument('--resolution', metavar='N')
    parser.add_argument('--step', metavar='H')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='mcfent',
        description='Entropy of hypersurfaces, mean curvature flow and '
                    'self-shrinker experiments.')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('table', help='closed-form entropy table')
    _add_common(p)
    p.add_argument('--max-n', dest='max_n', metavar='N')
    p.add_argument('--max-k', dest='max_k', metavar='K')
    p.set_defaults(handler=_cmd_table)

    p = commands.add_parser('entropy', help='entropy of surface files')
    _add_common(p)
    _add_entropy(p)
    p.add_argument('inputs', nargs='+', metavar='SURFACE')
    p.set_defaults(handler=_cmd_entropy)

    p = commands.add_parser('flow', help='evolve a surface')
    _add_common(p)
    _add_flow(p)
    p.add_argument('--kind', choices=[k.value for k in FlowKind])
    p.add_argument('--until-singularity', dest='until_singularity',
                   action='store_const', const='true')
    p.add_argument('--trace', metavar='CSV')
    p.add_argument('--snapshots-every', dest='snapshots_every',
                   metavar='N')
    p.add_argument('--entropy-every', dest='entropy_every', metavar='N')
    p.add_argument('input', metavar='SURFACE')
    p.set_defaults(handler=_cmd_flow)

    p = commands.add_parser('shoot', help='compute non-round shrinkers')
    _add_common(p)
    _add_shooting(p)
    p.add_argument('--al', action='append', metavar='P,Q',
                   help='Abresch-Langer curve (repeatable)')
    p.add_argument('--torus', action='store_true',
                   help='Angenent torus profile')
    p.set_defaults(handler=_cmd_shoot)

    p = commands.add_parser('perturb', help='inward perturbation of a '
                                            'shrinker')
    _add_common(p)
    _add_entropy(p)
    p.add_argument('--override', action='store_const', const='true',
                   help='perturb even when the eigenvalue is one')
    p.add_argument('--initial-s', dest='initial_s', metavar='S')
    p.add_argument('--shrinker-tol', dest='shrinker_tol', metavar='TOL',
                   help='largest max |phi| accepted as a shrinker')
    p.add_argument('input', metavar='SURFACE')
    p.set_defaults(handler=_cmd_perturb)

    p = commands.add_parser('verify', help='numerical property checks')
    _add_common(p)
    _add_flow(p)
    p.add_argument('--suite', choices=SUITES)
    p.add_argument('--simons-t', dest='simons_t', metavar='T')
    p.add_argument('--levels', metavar='N')
    p.add_argument('--input', required=True,
                   metavar='SURFACE_OR_SNAPSHOT_DIR')
    p.set_defaults(handler=_cmd_verify)

    p = commands.add_parser('pipeline', help='perturb, flow and blow up '
                                             'a shrinker')
    _add_common(p)
    _add_flow(p)
    _add_entropy(p)
    _add_shooting(p)
    p.add_argument('--levels', metavar='N')
    p.add_argument('shrinker', help='torus, al(p,q), sphere or circle')
    p.set_defaults(handler=_cmd_pipeline)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        settings = resolve_settings(args)
        configure_logging(settings['log_level'])
        return args.handler(args, settings)
    except PipelineError as exc:
        print(f'mcfent: {exc}', file=sys.stderr)
        return 3 if isinstance(exc.__cause__, ConvergenceError) else 2
    except ConvergenceError as exc:
        print(f'mcfent: {exc}', file=sys.stderr)
        return 3
    except MCFError as exc:
        print(f'mcfent: {exc}', file=sys.stderr)
        return 2
    except OSError as exc:
        print(f'mcfent: {exc}', file=sys.stderr)
        return 2
