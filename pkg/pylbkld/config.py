# Copyright 2021-2026 pylbkld contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Run configuration: one JSON document, strictly validated.

Example::

    {
        "model": {"name": "toy"},
        "estimator": "lbkld_partition",
        "design": {"kind": "scalar_interval", "lo": 2, "hi": 100, "grid_points": 25},
        "seed": 1,
        "lbkld": {"n": 10000, "L": 5, "n_min": 10, "replications": 20}
    }

Unknown keys anywhere are errors.  Every block is validated, and the model
is constructed, before any simulation starts.
"""

from .error import ConfigError
from .estimators import AbcConfig, LbkldConfig, NestedMcConfig
from .models import model_from_config
from .optimize import DesignSpec, SpsaConfig
from .parallel import default_workers
from .structs import EstimatorKind
from dataclasses import dataclass, field, fields, replace
import json
import logging
import numbers

log = logging.getLogger(__name__)


ESTIMATOR_ALIASES = {
    'lbkld': EstimatorKind.LBKLD_PARTITION,
    'nested_mc': EstimatorKind.NESTED_MC_KLD,
    'd_posterior': EstimatorKind.D_POSTERIOR_PRECISION,
}


@dataclass(frozen=True)
class ModelConfig:
    name: str
    params: dict = field(default_factory=dict)

    def build(self):
        return model_from_config(self.name, **self.params)


@dataclass(frozen=True)
class InferConfig:
    """Repeated-inference study settings.

    :param trials: The number of (theta_true, y) trials.
    """
    trials: int = 200

    def validate(self, prefix='infer'):
        if self.trials < 1:
            raise ConfigError('trials must be >= 1', f'{prefix}.trials')
        return self


@dataclass(frozen=True)
class PosteriorConfig:
    """Single posterior study settings.

    :param theta_true: The true parameter, or the prior mean when empty.
    """
    theta_true: tuple = ()

    def validate(self, prefix='posterior'):
        return self


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig
    design: DesignSpec
    estimator: EstimatorKind = EstimatorKind.LBKLD_PARTITION
    seed: int = 0
    replications: int = None
    workers: int = None
    output_path: str = None
    lbkld: LbkldConfig = field(default_factory=LbkldConfig)
    nested_mc: NestedMcConfig = field(default_factory=NestedMcConfig)
    abc: AbcConfig = field(default_factory=AbcConfig)
    spsa: SpsaConfig = field(default_factory=SpsaConfig)
    infer: InferConfig = field(default_factory=InferConfig)
    posterior: PosteriorConfig = field(default_factory=PosteriorConfig)

    def estimator_config(self, kind=None):
        """The configuration block for an estimator kind."""
        kind = EstimatorKind(kind or self.estimator)
        if kind in (EstimatorKind.LBKLD_PARTITION, EstimatorKind.LBKLD_NOPARTITION):
            return self.lbkld
        if kind == EstimatorKind.NESTED_MC_KLD:
            return self.nested_mc
        return self.abc

    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else default_workers()


_BLOCKS = {
    'lbkld': LbkldConfig,
    'nested_mc': NestedMcConfig,
    'abc': AbcConfig,
    'spsa': SpsaConfig,
    'infer': InferConfig,
    'posterior': PosteriorConfig,
}
_TOP_KEYS = {'model', 'estimator', 'design', 'seed', 'replications', 'workers', 'output_path'} | set(_BLOCKS)


def _coerce(value, typ, key):
    if value is None:
        return None
    if typ is bool:
        if not isinstance(value, bool):
            raise ConfigError(f'expected a boolean, got {value!r}', key)
        return value
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, numbers.Integral):
            raise ConfigError(f'expected an integer, got {value!r}', key)
        return int(value)
    if typ is float:
        if isinstance(value, bool) or not isinstance(value, numbers.Real):
            raise ConfigError(f'expected a number, got {value!r}', key)
        return float(value)
    if typ is str:
        if not isinstance(value, str):
            raise ConfigError(f'expected a string, got {value!r}', key)
        return value
    if typ is tuple:
        if not isinstance(value, list):
            raise ConfigError(f'expected a list, got {value!r}', key)
        return tuple(tuple(_number(v, f'{key}[{i}]') for v in x) if isinstance(x, list)
                     else _number(x, f'{key}[{i}]') for i, x in enumerate(value))
    return value


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise ConfigError(f'expected a number, got {value!r}', key)
    return value


def _build(cls, data, prefix, skip=()):
    """Construct a dataclass from a dict, rejecting unknown keys."""
    if not isinstance(data, dict):
        raise ConfigError(f'expected an object, got {type(data).__name__}', prefix)
    known = {f.name: f for f in fields(cls) if f.name not in skip}
    for key in data:
        if key not in known:
            raise ConfigError(f'unknown key, expected one of {sorted(known)}', f'{prefix}.{key}')
    kwargs = {}
    for k, v in data.items():
        if v is None and known[k].default is not None:
            raise ConfigError('null is not allowed', f'{prefix}.{k}')
        kwargs[k] = _coerce(v, known[k].type, f'{prefix}.{k}')
    return cls(**kwargs)


def _parse_estimator(value):
    if not isinstance(value, str):
        raise ConfigError(f'expected a string, got {value!r}', 'estimator')
    if value in ESTIMATOR_ALIASES:
        return ESTIMATOR_ALIASES[value]
    try:
        return EstimatorKind(value)
    except ValueError:
        names = sorted([k.value for k in EstimatorKind] + list(ESTIMATOR_ALIASES))
        raise ConfigError(f'unknown estimator {value!r}, expected one of {names}', 'estimator')


def _parse_model(data):
    if not isinstance(data, dict):
        raise ConfigError('expected an object', 'model')
    if 'name' not in data:
        raise ConfigError('missing required key', 'model.name')
    if not isinstance(data['name'], str):
        raise ConfigError(f'expected a string, got {data["name"]!r}', 'model.name')
    params = {k: v for k, v in data.items() if k != 'name'}
    for key, value in params.items():
        _number(value, f'model.{key}')
    cfg = ModelConfig(name=data['name'], params=params)
    cfg.build()
    return cfg


def parse_config(data: dict) -> RunConfig:
    """Validate a decoded JSON document and build the :class:`RunConfig`.

    :raise ConfigError: naming the offending key on any problem.
    """
    if not isinstance(data, dict):
        raise ConfigError('the configuration must be a JSON object')
    for key in data:
        if key not in _TOP_KEYS:
            raise ConfigError(f'unknown key, expected one of {sorted(_TOP_KEYS)}', key)
    for key in ('model', 'design'):
        if key not in data:
            raise ConfigError('missing required key', key)
    kwargs = {
        'model': _parse_model(data['model']),
        'design': _build(DesignSpec, data['design'], 'design').validate(),
    }
    if 'estimator' in data:
        kwargs['estimator'] = _parse_estimator(data['estimator'])
    for key, typ in (('seed', int), ('replications', int), ('workers', int), ('output_path', str)):
        if key in data:
            kwargs[key] = _coerce(data[key], typ, key)
    for key, cls in _BLOCKS.items():
        if key in data:
            kwargs[key] = _build(cls, data[key], key)
    cfg = RunConfig(**kwargs)
    if cfg.replications is not None:
        cfg = replace(cfg, lbkld=replace(cfg.lbkld, replications=cfg.replications),
                      nested_mc=replace(cfg.nested_mc, replications=cfg.replications))
    return validate(cfg)


def validate(cfg: RunConfig) -> RunConfig:
    """Check every block and the model/design pairing."""
    for key in _BLOCKS:
        getattr(cfg, key).validate(key)
    if cfg.seed is not None and cfg.seed < 0:
        raise ConfigError('seed must be nonnegative', 'seed')
    if cfg.workers is not None and cfg.workers < 1:
        raise ConfigError('workers must be >= 1', 'workers')
    model = cfg.model.build()
    if cfg.design.kind == 'point':
        try:
            model.validate_design(cfg.design.value)
        except ValueError as ex:
            raise ConfigError(str(ex), 'design.value') from ex
    if cfg.posterior.theta_true and len(cfg.posterior.theta_true) != model.theta_dim:
        raise ConfigError(f'needs {model.theta_dim} values', 'posterior.theta_true')
    for idx, design in enumerate(cfg.spsa.compare):
        try:
            model.validate_design(design)
        except ValueError as ex:
            raise ConfigError(str(ex), f'spsa.compare[{idx}]') from ex
    return cfg


def load_config(path) -> RunConfig:
    """Read and validate a JSON run configuration file."""
    try:
        with open(path, 'rt', encoding='utf-8') as f:
            data = json.load(f)
    except OSError as ex:
        raise ConfigError(f'cannot read {path}: {ex.strerror}', 'config')
    except json.JSONDecodeError as ex:
        raise ConfigError(f'invalid JSON in {path}: {ex}', 'config')
    return parse_config(data)


def add_common_arguments(p):
    """Add the arguments shared by every command."""
    p.add_argument('--config', '-c',
                   required=True,
                   help='The JSON run configuration path')
    p.add_argument('--seed',
                   type=int,
                   help='Override the configuration seed')
    p.add_argument('--workers',
                   type=int,
                   help='The worker process count.  Defaults to LBKLD_WORKERS, then 1.')
    p.add_argument('--out',
                   help='Override the configuration output_path')
    p.add_argument('--verbose', '-v',
                   action='store_true',
                   help='Log progress at INFO level')


def config_from_args(args) -> RunConfig:
    """Load the configuration file and apply command-line overrides."""
    cfg = load_config(args.config)
    overrides = {}
    if args.seed is not None:
        overrides['seed'] = args.seed
    if args.workers is not None:
        overrides['workers'] = args.workers
    if args.out is not None:
        overrides['output_path'] = args.out
    if overrides:
        cfg = validate(replace(cfg, **overrides))
    return cfg
