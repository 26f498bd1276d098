"""Run configuration: tolerance profiles, environment and config files

A config file is plain ``key = value`` lines grouped in sections::

    [run]
    h = 2
    eps = 0.1
    data_dir = /data/maass

    [identities]
    tol = 1e-9

One section per tolerance group (``specfun``, ``identities``, ``contour``,
``innerprod``, ``scs``) with a single ``tol`` key. Command-line flags override
the file, which overrides the environment and the defaults. Without
``SCSLAB_DATA_DIR`` or ``data_dir`` the forms shipped in ``scslab/data`` are used.
"""
from __future__ import annotations
from typing import Any, Self, cast
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
import configparser
import dataclasses
import importlib.resources
import os

from loguru import logger

from .errors import ConfigError
from .serialization import DataclassSerialize
from .types import DEFAULT_EPS, THETA

__all__ = ('TolerancePolicy', 'RunConfig', 'load_config', 'read_config_file', 'TOL_GROUPS', 'BUNDLED_DATA')

TOL_GROUPS = ('specfun', 'identities', 'contour', 'innerprod', 'scs')
PROJECT_ROOT = cast(Path, importlib.resources.files(__name__.split('.')[0]))
BUNDLED_DATA = PROJECT_ROOT / 'data'
RUN_KEYS = ('h', 'eps', 'theta', 'data_dir', 'output', 'cache_dir', 'K_max')


@dataclass(frozen=True)
class TolerancePolicy(DataclassSerialize):
    """Tolerances per module group

    Attributes:
        specfun: Special functions against their oracles
        identities: Exact identities (kernels, duplication, connection formulas)
        contour: Vertical-line and Perron integrals
        innerprod: Relative budget of the geometric and spectral sides
        scs: Sums against their brute-force and Perron reproductions
    """
    specfun: float = 1e-10
    identities: float = 1e-8
    contour: float = 1e-6
    innerprod: float = 5e-2
    scs: float = 1e-6

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not 0 < v < 1:
                raise ConfigError(f'tolerance {f.name} must lie in (0, 1), got {v}')

    def tightened(self, factor: float) -> Self:
        """Every tolerance divided by *factor*"""
        if not factor >= 1:
            raise ConfigError(f'tighten factor must be >= 1, got {factor}')
        return replace(self, **{f.name: getattr(self, f.name) / factor for f in fields(self)})


@dataclass(frozen=True)
class RunConfig(DataclassSerialize):
    """Everything a CLI run depends on

    Attributes:
        data_dir: Directory of ``*.maass`` files, the bundled level one forms by default
        tol: Tolerance profile
        h: The shift
        eps: The ε of the smoothed sums
        theta: Ramanujan-Petersson exponent (7/64, or 0)
        output: CSV output path, ``None`` for stdout
        cache_dir: Pairing cache directory
        K_max: Basis depth, ``None`` for the whole basis
    """
    data_dir: Path|None = BUNDLED_DATA
    tol: TolerancePolicy = field(default_factory=TolerancePolicy)
    h: int = 1
    eps: float = DEFAULT_EPS
    theta: float = THETA
    output: Path|None = None
    cache_dir: Path|None = None
    K_max: int|None = None

    def __post_init__(self):
        if self.h < 1:
            raise ConfigError(f'h must be a positive integer, got {self.h}')
        if not 0 < self.eps < 0.5:
            raise ConfigError(f'eps must lie in (0, 0.5), got {self.eps}')
        if self.data_dir is not None and not Path(self.data_dir).is_dir():
            raise ConfigError(f'data directory {self.data_dir} does not exist')
        if self.K_max is not None and self.K_max < 1:
            raise ConfigError(f'K_max must be positive, got {self.K_max}')

    def require_data_dir(self) -> Path:
        if self.data_dir is None:
            raise ConfigError('no data directory: pass --data or set SCSLAB_DATA_DIR')
        return Path(self.data_dir)


def _convert(key: str, raw: str) -> Any:
    try:
        if key in ('h', 'K_max'):
            return int(raw)
        if key in ('eps', 'theta'):
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f'{key} = {raw!r}: {exc}') from exc
    return Path(raw).expanduser()


def read_config_file(path: Path) -> dict[str, Any]:
    """Settings from a config file as keyword arguments of :class:`RunConfig`

    Raises:
        ConfigError: unknown sections or keys, or unparsable values
    """
    path = Path(path)
    parser = configparser.ConfigParser()
    try:
        with path.open() as f:
            parser.read_file(f)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f'{path}: {exc}') from exc
    kw: dict[str, Any] = {}
    tols: dict[str, float] = {}
    for section in parser.sections():
        items = dict(parser.items(section))
        if section == 'run':
            for key, raw in items.items():
                # configparser lower-cases keys
                name = {k.lower(): k for k in RUN_KEYS}.get(key)
                if name is None:
                    raise ConfigError(f'{path}: unknown key {key!r} in [run]')
                kw[name] = _convert(name, raw)
        elif section in TOL_GROUPS:
            if set(items) != {'tol'}:
                raise ConfigError(f'{path}: section [{section}] takes exactly one key, tol')
            try:
                tols[section] = float(items['tol'])
            except ValueError as exc:
                raise ConfigError(f'{path}: [{section}] tol: {exc}') from exc
        else:
            raise ConfigError(f'{path}: unknown section [{section}]')
    if tols:
        kw['tol'] = TolerancePolicy(**tols)
    logger.debug(f'read config {path}: {kw}')
    return kw


def load_config(path: Path|None = None, tighten: float|None = None, **overrides: Any) -> RunConfig:
    """Defaults, then the environment, then *path*, then non-``None`` *overrides*
    """
    kw: dict[str, Any] = {}
    env_data = os.environ.get('SCSLAB_DATA_DIR')
    if env_data:
        kw['data_dir'] = Path(env_data)
    env_cache = os.environ.get('SCSLAB_CACHE_DIR')
    if env_cache:
        kw['cache_dir'] = Path(env_cache)
    if path is not None:
        kw.update(read_config_file(path))
    kw.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(kw) - known
    if unknown:
        raise ConfigError(f'unknown settings: {sorted(unknown)}')
    config = RunConfig(**kw)
    if tighten is not None:
        config = replace(config, tol=config.tol.tightened(tighten))
    return config
