# MIT License

# Copyright (c) 2026 logistic-harvest developers

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

import logging
import math
import os
import re
from pathlib import Path

from .domain import MeshKind, build_mesh, get_mesh_kind
from .errors import ConfigTypeError, HarvestException, InvalidArgument
from .forms import Params

log = logging.getLogger(__name__)

# Utilities
def _validate_bool(val):
    if isinstance(val, str):
        value = val.strip().lower()

        try:
            return bool(int(value))
        except ValueError:
            pass

        if value in ("true", "yes", "on"):
            return True
        elif value in ("false", "no", "off"):
            return False
        else:
            raise ConfigTypeError(f"'{val}' is not valid boolean value")
    else:
        return bool(val)

def _validate_int(val):
    try:
        return int(val)
    except ValueError:
        raise ConfigTypeError(f"'{val}' is not valid integer") from None

def _validate_positive_int(val):
    value = _validate_int(val)
    if value < 1:
        raise ConfigTypeError(f"'{val}' must be a positive integer")
    return value

def _validate_float(val):
    try:
        value = float(val)
    except ValueError:
        raise ConfigTypeError(f"'{val}' is not valid number") from None

    if not math.isfinite(value):
        raise ConfigTypeError(f"'{val}' is not a finite number")
    return value

def _validate_positive_float(val):
    value = _validate_float(val)
    if value <= 0:
        raise ConfigTypeError(f"'{val}' must be positive")
    return value

def _validate_optional_float(val):
    if val is None or str(val).strip().lower() in ("", "none", "auto"):
        return None
    return _validate_float(val)

_re_pi = re.compile(r'^(?P<coef>[0-9.eE+-]+)?\s*\*?\s*pi\s*(?:/\s*(?P<div>[0-9.eE+-]+))?$')

def extent_value(text):
    """Parse an extent: a number, a multiple or fraction of ``pi`` (``pi``,
    ``2pi``, ``2*pi``, ``pi/2``) or ``j01``, the first zero of ``J_0``
    """
    if not isinstance(text, str):
        return float(text)

    value = text.strip().lower()
    if value == "j01":
        from .spectra import bessel_j0_zero
        return bessel_j0_zero()

    match = _re_pi.match(value)
    if match is not None:
        coef = float(match.group('coef')) if match.group('coef') else 1.0
        div = float(match.group('div')) if match.group('div') else 1.0
        return coef * math.pi / div

    return float(value)

def _validate_extent(val):
    try:
        value = extent_value(val)
    except (ValueError, ZeroDivisionError):
        raise ConfigTypeError(f"'{val}' is not valid extent") from None

    if not math.isfinite(value) or value <= 0:
        raise ConfigTypeError(f"extent must be positive, got '{val}'")
    return value

def _validate_kind(val):
    try:
        return get_mesh_kind(val.strip() if isinstance(val, str) else val).value
    except InvalidArgument as e:
        raise ConfigTypeError(str(e)) from None

def _validate_list(val, validator):
    if isinstance(val, (list, tuple)):
        items = val
    else:
        items = [i.strip() for i in str(val).split(',') if i.strip()]

    if not items:
        raise ConfigTypeError(f"'{val}' is an empty list")
    return tuple(validator(i) for i in items)

def _validate_value_from_iterator(val, iterator):
    values = [i for i in iterator]
    if val not in values:
        raise ConfigTypeError(f"'{val}' is not valid value, available values are {values}")

    return val

def _dummy_validator(val):
    return val

# Verification scenarios, see logistic_harvest.cli.verify
scenarios = [
    None,
    "eigen-oracles",
    "jacobian",
    "a-priori-bound",
    "superlinear-uniqueness",
    "superlinear-order",
    "superlinear-asymptotics",
    "sublinear-folds",
    "borderline-uniqueness",
    "continuum",
    "nonresonant",
    "perturbation",
    "refinement",
]

class EnvironmentVariables:
    _vars = [
        [
            'threads',
            os.cpu_count() or 1,
            _validate_positive_int,
        ],
        [
            'no_progress_bar',
            False,
            _validate_bool,
        ],
        [
            'output_dir',
            './harvest-output',
            _dummy_validator,
        ],
    ]

    def __init__(self):
        self.data = {}

        for key, default_value, validator in self._vars:
            env_key = f'HARVEST_{key.upper()}'
            env_value = os.environ.get(env_key)
            if env_value is not None:
                try:
                    self.data[key] = validator(env_value)
                except Exception as e:
                    raise HarvestException(
                        f'An error happened when validating env {env_key}. ' \
                        f'Reason: {e}'
                    ) from None
            else:
                self.data[key] = default_value

    def read(self, name):
        try:
            return self.data[name]
        except KeyError:
            raise HarvestException(f'environment variable "{name}" is not exist')

_env_orig = EnvironmentVariables()

class EnvironmentVariablesProxy:
    def __getattr__(self, name):
        return _env_orig.read(name)

    def __setattr__(self, name, value):
        raise NotImplementedError

env = EnvironmentVariablesProxy()

class RunConfig:
    """Flat ``key = value`` run configuration

    Every key has a default and a validator in :attr:`confs`. Values are read
    as attributes; ``lambda`` is exposed as ``lam``.
    """
    confs = {
        "kind": [
            MeshKind.Interval.value,
            _validate_kind,
        ],
        "extent": [
            math.pi,
            _validate_extent,
        ],
        "n": [
            256,
            _validate_int,
        ],
        "p": [
            3.0,
            _validate_float,
        ],
        "q": [
            0.5,
            _validate_float,
        ],
        "alpha": [
            0.0,
            _validate_float,
        ],
        "beta": [
            1.0,
            _validate_float,
        ],
        "lambda": [
            0.0,
            _validate_float,
        ],
        "lambda_cap": [
            50.0,
            _validate_float,
        ],
        "step": [
            1e-2,
            _validate_positive_float,
        ],
        "max_step": [
            0.5,
            _validate_positive_float,
        ],
        "max_points": [
            2000,
            _validate_positive_int,
        ],
        "tol": [
            1e-10,
            _validate_positive_float,
        ],
        "max_iter": [
            50,
            _validate_positive_int,
        ],
        "tau": [
            None,
            _validate_optional_float,
        ],
        "Lambda": [
            None,
            _validate_optional_float,
        ],
        "lambdas": [
            (0.02, 0.05, 0.1, 0.2, 0.35, 0.5, 1.0, 2.0, 3.5, 5.0, 10.0, 20.0, 35.0, 50.0),
            lambda x: _validate_list(x, _validate_float),
        ],
        "alpha_list": [
            (1e-2, 1e-3, 1e-4),
            lambda x: _validate_list(x, _validate_positive_float),
        ],
        "beta_list": [
            (0.9, 0.99, 0.999),
            lambda x: _validate_list(x, _validate_positive_float),
        ],
        "p_list": [
            (1.5, 2.0, 2.5, 3.0, 4.0, 5.0),
            lambda x: _validate_list(x, _validate_float),
        ],
        "q_list": [
            (0.5, 0.7, 0.9),
            lambda x: _validate_list(x, _validate_float),
        ],
        "k_list": [
            (4, 8, 16, 32),
            lambda x: _validate_list(x, _validate_positive_int),
        ],
        "levels": [
            (128, 256, 512),
            lambda x: _validate_list(x, _validate_positive_int),
        ],
        "scenario": [
            None,
            lambda x: _validate_value_from_iterator(x, scenarios),
        ],
        "method": [
            "newton",
            lambda x: _validate_value_from_iterator(x, ["newton", "monotone"]),
        ],
        "seed_from": [
            "neumann",
            lambda x: _validate_value_from_iterator(x, ["neumann", "bifurcation"]),
        ],
        "homotopy": [
            "none",
            lambda x: _validate_value_from_iterator(x, ["none", "alpha", "beta"]),
        ],
        "stability": [
            True,
            _validate_bool,
        ],
        "plot_script": [
            False,
            _validate_bool,
        ],
        "no_progress_bar": [
            False,
            _validate_bool,
        ],
        "out": [
            None,
            _dummy_validator,
        ],
    }
    default_conf = {
        x: y for x, (y, _) in confs.items()
    }

    def __init__(self, data=None, source=None):
        self._data = dict(self.default_conf)
        self.source = source

        for key, value in (data or {}).items():
            self.write(key, value)

    def write(self, name, value):
        try:
            _, validator = self.confs[name]
        except KeyError:
            raise ConfigTypeError(f"unknown config key '{name}'") from None

        try:
            self._data[name] = validator(value)
        except ConfigTypeError as e:
            raise ConfigTypeError(f"config key '{name}': {e}") from None

    def read(self, name):
        try:
            return self._data[name]
        except KeyError:
            raise ConfigTypeError(f"unknown config key '{name}'") from None

    def __getattr__(self, name):
        if name.startswith('_'):
            raise AttributeError(name)
        if name == 'lam':
            name = 'lambda'
        return self.read(name)

    def as_dict(self):
        return dict(self._data)

    def params(self, **overrides):
        """Validated :class:`~logistic_harvest.forms.Params`"""
        values = {
            'p': self.p,
            'q': self.q,
            'lam': self.lam,
            'alpha': self.alpha,
            'beta': self.beta,
        }
        values.update(overrides)
        try:
            return Params(**values)
        except InvalidArgument as e:
            raise ConfigTypeError(str(e)) from None

    def mesh(self, n=None, extent=None):
        try:
            return build_mesh(
                self.kind,
                self.extent if extent is None else extent,
                self.n if n is None else n
            )
        except InvalidArgument as e:
            raise ConfigTypeError(str(e)) from None

    def validate(self):
        """Check the mesh and problem coefficients before a command runs"""
        self.mesh()
        self.params()
        if self.lambda_cap < 0:
            raise ConfigTypeError(f"lambda_cap must be non-negative, got {self.lambda_cap}")
        return self

def parse_config_text(text, source=None):
    """Parse ``key = value`` lines; ``#`` starts a comment"""
    data = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split('#', 1)[0].strip()
        if not line:
            continue

        key, sep, value = line.partition('=')
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigTypeError(f"line {lineno}: expected 'key = value', got '{line}'")
        if key in data:
            raise ConfigTypeError(f"line {lineno}: duplicate config key '{key}'")

        data[key] = value

    return RunConfig(data, source=source)

def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigTypeError(f"cannot read config file '{path}': {e}") from None

    log.debug(f"Loaded config from '{path.resolve()}'")
    return parse_config_text(text, source=str(path))
