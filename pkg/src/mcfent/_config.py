""" _config.py - run-time configuration from environment and config files """

import configparser
import dataclasses
import enum
import logging
import os
from typing import Dict, Mapping, Optional

from ._errors import DomainError


__all__ = (
    'Scheme',
    'FlowParams',
    'ShootingParams',
    'EntropyOptions',
    'load_config',
    'config_from_env',
    'default_workers',
    'configure_logging',
)


logger = logging.getLogger(__name__)


ENV_CONFIG = 'MCFENT_CONFIG'
ENV_LOG_LEVEL = 'MCFENT_LOG_LEVEL'
ENV_WORKERS = 'MCFENT_WORKERS'

CONFIG_SECTION = 'mcfent'

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


class Scheme(enum.Enum):
    EXPLICIT = 'explicit'
    SEMI_IMPLICIT = 'semi-implicit'


@dataclasses.dataclass(frozen=True)
class FlowParams:
    """Time stepping parameters for `run_flow`.

    `a_max` is the curvature blow-up threshold; when None it is
    `a_max_factor` times the initial maximum of |A|.  `curvature_cfl`
    caps each step at curvature_cfl / max|A|^2 (None disables the cap).
    """
    dt: float = 1e-3
    scheme: Scheme = Scheme.SEMI_IMPLICIT
    redistribute: bool = True
    remesh_ratio: float = 0.3
    t_max: float = 10.0
    a_max: Optional[float] = None
    a_max_factor: float = 50.0
    dt_min: float = 1e-9
    curvature_cfl: Optional[float] = 1e-3
    resolution_guard: float = 0.5
    snapshot_every: int = 1
    entropy_every: int = 0

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError(f'time step must be positive, got {self.dt}')
        if not self.t_max > 0:
            raise DomainError(f't_max must be positive, got {self.t_max}')
        if not 0 < self.remesh_ratio < 1:
            raise DomainError(
                f'remesh_ratio must lie in (0, 1), got {self.remesh_ratio}')
        if self.snapshot_every < 1:
            raise DomainError('snapshot_every must be at least 1')
        if self.entropy_every < 0:
            raise DomainError('entropy_every must be non-negative')
        if not isinstance(self.scheme, Scheme):
            object.__setattr__(self, 'scheme', Scheme(self.scheme))


@dataclasses.dataclass(frozen=True)
class ShootingParams:
    """Integration and root finding parameters for the shooting methods."""
    step: float = 1e-4
    scan_step: float = 2e-3
    xtol: float = 1e-12
    resolution: int = 512
    max_length: float = 200.0
    torus_scan: tuple = (2.05, 6.0, 0.05)
    axis_guard: float = 0.02

    def __post_init__(self):
        if not 0 < self.step <= self.scan_step:
            raise DomainError('need 0 < step <= scan_step')
        if self.resolution < 64:
            raise DomainError(
                f'resolution must be at least 64, got {self.resolution}')


@dataclasses.dataclass(frozen=True)
class EntropyOptions:
    """Multistart parameters for `entropy_sup`."""
    probes: int = 8
    scales: int = 5
    maxiter: int = 200
    tie_tol: float = 1e-12


def load_config(path: str) -> Dict[str, str]:
    """Read a ``key = value`` file, with or without a ``[mcfent]``
    header, and return its entries."""
    with open(path, encoding='utf-8') as f:
        text = f.read()
    parser = configparser.ConfigParser(interpolation=None)
    if not text.lstrip().startswith('['):
        text = f'[{CONFIG_SECTION}]\n' + text
    try:
        parser.read_string(text, source=path)
    except configparser.Error as exc:
        raise DomainError(f'cannot parse config file {path}: {exc}') from exc
    extra = [s for s in parser.sections() if s != CONFIG_SECTION]
    if extra:
        raise DomainError(
            f'unknown sections in config file {path}: {extra}')
    if not parser.has_section(CONFIG_SECTION):
        return {}
    return dict(parser.items(CONFIG_SECTION))


def config_from_env(environ: Optional[Mapping[str, str]] = None
                    ) -> Dict[str, str]:
    """Entries of the file named by MCFENT_CONFIG, if set."""
    environ = os.environ if environ is None else environ
    path = environ.get(ENV_CONFIG, '')
    if not path:
        return {}
    logger.debug('reading configuration from %s', path)
    return load_config(path)


def default_workers(environ: Optional[Mapping[str, str]] = None) -> int:
    environ = os.environ if environ is None else environ
    value = environ.get(ENV_WORKERS, '')
    if not value:
        return 1
    try:
        workers = int(value)
    except ValueError:
        raise DomainError(
            f"unsupported {ENV_WORKERS} value '{value}'") from None
    if workers < 1:
        raise DomainError(f"unsupported {ENV_WORKERS} value '{value}'")
    return workers


def configure_logging(level: Optional[str] = None) -> None:
    """Install a stderr handler on the root logger.  Only the command line
    calls this; the library itself never configures handlers."""
    if level is None:
        level = os.getenv(ENV_LOG_LEVEL, 'WARNING')
    numeric = logging.getLevelName(level.upper())
    if not isinstance(numeric, int):
        raise DomainError(f"unsupported log level '{level}'")
    logging.basicConfig(level=numeric, format=LOG_FORMAT)
    logging.getLogger().setLevel(numeric)
