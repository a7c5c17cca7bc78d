""" Toy experiment configuration: schema, strict loading and digests """

from dataclasses import dataclass, field, fields, is_dataclass, replace
from enum import Enum
from hashlib import sha256
from io import StringIO
from os.path import dirname, realpath, join
import json
import logging
import math

from ruamel.yaml import YAML
from ruamel.yaml.error import YAMLError

from snce.neighbor import Temperature
from snce.process import open_file

DEFAULT_PATH = join(dirname(realpath(__file__)), 'toy_default.json')


class ConfigError(ValueError):
    def __init__(self, field_name, message):
        self.field = field_name
        self.reason = message
        super(ConfigError, self).__init__('{}: {}'.format(field_name, message) if field_name else message)


class Objective(Enum):
    L2_REGRESSION = 'l2_regression'
    CE = 'ce'
    SNCE = 'snce'
    LABEL_SMOOTHING = 'label_smoothing'
    STOCHASTIC_QUANTIZATION = 'stochastic_quantization'

    @property
    def categorical(self):
        return self is not Objective.L2_REGRESSION


def _require(condition, name, message):
    if not condition:
        raise ConfigError(name, message)

def _finite(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)

def _integer(value):
    return isinstance(value, int) and not isinstance(value, bool)


@dataclass(frozen=True)
class MixtureSpec:
    centers: tuple = ((-2.0, 0.0), (2.0, 0.0))
    variance: float = 0.25
    weights: tuple = (0.5, 0.5)

    def __post_init__(self):
        centers = tuple(tuple(float(c) for c in center) for center in self.centers)
        weights = tuple(float(w) for w in self.weights)
        object.__setattr__(self, 'centers', centers)
        object.__setattr__(self, 'weights', weights)

        _require(len(centers) >= 1, 'centers', 'need at least one center')
        _require(all(len(c) == 2 and all(map(math.isfinite, c)) for c in centers), 'centers', 'each center must be a finite 2D point')
        _require(_finite(self.variance) and self.variance > 0, 'variance', 'must be > 0')
        _require(len(weights) == len(centers), 'weights', 'need one weight per center')
        _require(all(math.isfinite(w) and w >= 0 for w in weights), 'weights', 'must be nonnegative')
        _require(abs(math.fsum(weights) - 1.0) <= 1e-9, 'weights', 'must sum to 1')


@dataclass(frozen=True)
class GridSpec:
    lo: float = -5.0
    hi: float = 5.0
    n_per_axis: int = 50

    def __post_init__(self):
        _require(_finite(self.lo) and _finite(self.hi), 'lo', 'bounds must be finite')
        _require(self.lo < self.hi, 'hi', 'must be greater than lo')
        _require(_integer(self.n_per_axis) and self.n_per_axis >= 2, 'n_per_axis', 'must be an integer >= 2')

    @property
    def K(self):
        return self.n_per_axis * self.n_per_axis


@dataclass(frozen=True)
class MlpSpec:
    depth: int = 10
    hidden_width: int = 256
    activation: str = 'relu'

    def __post_init__(self):
        _require(_integer(self.depth) and self.depth >= 1, 'depth', 'must be an integer >= 1')
        _require(_integer(self.hidden_width) and self.hidden_width >= 1, 'hidden_width', 'must be an integer >= 1')
        _require(self.activation in ('relu', 'tanh'), 'activation', 'must be relu or tanh')


@dataclass(frozen=True)
class OptimizerSpec:
    kind: str = 'adam'
    learning_rate: float = 1e-3
    betas: tuple = (0.9, 0.999)
    eps: float = 1e-8

    def __post_init__(self):
        object.__setattr__(self, 'betas', tuple(float(b) for b in self.betas))
        _require(self.kind in ('adam', 'sgd'), 'kind', 'must be adam or sgd')
        _require(_finite(self.learning_rate) and self.learning_rate > 0, 'learning_rate', 'must be > 0')
        _require(len(self.betas) == 2 and all(0 <= b < 1 for b in self.betas), 'betas', 'need two values in [0, 1)')
        _require(_finite(self.eps) and self.eps > 0, 'eps', 'must be > 0')


@dataclass(frozen=True)
class TemperatureSpec:
    tau: float = None
    two_tau_sq: float = None

    def __post_init__(self):
        _require((self.tau is None) != (self.two_tau_sq is None), 'tau', 'give exactly one of tau and two_tau_sq')
        value = self.tau if self.tau is not None else self.two_tau_sq
        _require(_finite(value) and value > 0, 'tau' if self.tau is not None else 'two_tau_sq', 'must be > 0')

    def temperature(self):
        if self.tau is not None:
            return Temperature(float(self.tau))
        return Temperature.from_two_tau_sq(self.two_tau_sq)

    @classmethod
    def of(cls, temp):
        return cls(tau=None, two_tau_sq=temp.two_tau_sq)


@dataclass(frozen=True)
class ToyConfig:
    mixture: MixtureSpec = field(default_factory=MixtureSpec)
    grid: GridSpec = field(default_factory=GridSpec)
    n_samples: int = 100
    objective: Objective = Objective.SNCE
    temperature: TemperatureSpec = field(default_factory=lambda: TemperatureSpec(two_tau_sq=1.0))
    epsilon: float = 0.1
    steps: int = 2000
    batch_size: int = None
    mlp: MlpSpec = field(default_factory=MlpSpec)
    optimizer: OptimizerSpec = field(default_factory=OptimizerSpec)
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.objective, str):
            try:
                object.__setattr__(self, 'objective', Objective(self.objective))
            except ValueError:
                raise ConfigError('objective', 'must be one of {}'.format(', '.join(o.value for o in Objective)))

        _require(_integer(self.n_samples) and self.n_samples >= 1, 'n_samples', 'must be an integer >= 1')
        _require(_integer(self.steps) and self.steps >= 1, 'steps', 'must be an integer >= 1')
        _require(_finite(self.epsilon) and 0 <= self.epsilon < 1, 'epsilon', 'must lie in [0, 1)')
        _require(self.batch_size is None or (_integer(self.batch_size) and 1 <= self.batch_size <= self.n_samples),
                 'batch_size', 'must be an integer in [1, n_samples]')
        _require(_integer(self.seed) and self.seed >= 0, 'seed', 'must be a nonnegative integer')

    def with_changes(self, **changes):
        return replace(self, **changes)

    @property
    def label(self):
        """
        Run label used for output directories and summary rows
        """
        if self.objective in (Objective.SNCE, Objective.STOCHASTIC_QUANTIZATION):
            prefix = 'snce' if self.objective is Objective.SNCE else 'sq'
            return '{}_tau{:g}'.format(prefix, self.temperature.temperature().tau) if self.temperature.tau is not None \
                else '{}_2tau2_{:g}'.format(prefix, self.temperature.two_tau_sq)
        if self.objective is Objective.LABEL_SMOOTHING:
            return 'ce_ls{:g}'.format(self.epsilon)

        return self.objective.value


NESTED = {'mixture': MixtureSpec, 'grid': GridSpec, 'mlp': MlpSpec,
          'optimizer': OptimizerSpec, 'temperature': TemperatureSpec}


def _build(cls, data, prefix=''):
    if not isinstance(data, dict):
        raise ConfigError(prefix.rstrip('.') or None, 'expected a mapping, got {}'.format(type(data).__name__))

    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigError(prefix + unknown[0], 'unknown field')

    kwargs = {}
    for key, value in data.items():
        nested = NESTED.get(key) if cls is ToyConfig else None
        kwargs[key] = _build(nested, value, prefix + key + '.') if nested else value

    try:
        return cls(**kwargs)
    except ConfigError as ex:
        raise ConfigError(prefix + ex.field if ex.field else prefix.rstrip('.') or None, ex.reason)
    except (TypeError, ValueError) as ex:
        raise ConfigError(prefix.rstrip('.') or None, str(ex))

def _reject_constant(name):
    raise ValueError('{} is not allowed in a config'.format(name))

def _plain(value):
    if is_dataclass(value):
        return {f.name: _plain(getattr(value, f.name)) for f in fields(value)}
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]

    return value

def to_dict(config):
    return _plain(config)

def canonical_json(obj):
    return json.dumps(_plain(obj), sort_keys=True, separators=(',', ':'), allow_nan=False)

def config_hash(obj):
    return sha256(canonical_json(obj).encode('utf-8')).hexdigest()


class ConfigLoader(object):
    def __init__(self):
        self.logger = logging.getLogger('snce.config')
        self.yaml = YAML(typ='safe', pure=True)

    def display(self, config):
        """
        Log the resolved config as YAML
        """
        stream = StringIO()
        self.yaml.default_flow_style = False
        self.yaml.dump(to_dict(config), stream)
        self.logger.info('### Toy configuration ###\n{}'.format(stream.getvalue()))

    def load(self, file_path=DEFAULT_PATH):
        """
        Read a JSON or YAML file and validate it as a ToyConfig
        """
        text = open_file(file_path)
        try:
            if str(file_path).lower().endswith('.json'):
                data = json.loads(text, parse_constant=_reject_constant)
            else:
                data = self.yaml.load(text)
        except (ValueError, YAMLError) as ex:
            raise ConfigError(None, 'cannot parse {}: {}'.format(file_path, ex))

        self.logger.debug('Loaded config from {}'.format(file_path))
        return self.parse({} if data is None else data)

    def parse(self, data):
        return _build(ToyConfig, data)


def load_config(file_path=DEFAULT_PATH):
    return ConfigLoader().load(file_path)
