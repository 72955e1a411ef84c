# Copyright 2026 The wcopt Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.


"""Stability and generalization experiments for SGD-type methods."""

import json
import os

from ._wcopt import (
    ConfigError,
    DomainError,
    Error,
    NonConvergedError,
    UnsupportedError,
    ValidationError,
    dp_noise_scale,
    dp_privacy_precheck,
    enumerated_inclusion_frequency,
    fit_rate,
    inclusion_probability,
    project_to_ball,
    prox_oracle_1d,
    run_acceptance,
)
from . import _wcopt

__all__ = [
    "ConfigError", "DomainError", "Error", "NonConvergedError",
    "UnsupportedError", "ValidationError", "dp_noise_scale",
    "dp_privacy_precheck", "enumerate_config", "enumerated_inclusion_frequency",
    "fit_rate", "inclusion_probability", "load_config", "normalize_config",
    "project_to_ball", "prox_oracle_1d", "run_acceptance", "run_config", "sweep",
]


def load_config(path):
    """Reads a config file into a dict, remembering its directory."""
    with open(path, encoding="utf-8") as fh:
        config = json.load(fh)
    return config, os.path.dirname(os.path.abspath(path))


def _prepare(config, base_dir):
    if isinstance(config, (str, os.PathLike)):
        config, base_dir = load_config(config)
    return json.dumps(config), base_dir


def _decode(text, fmt):
    return json.loads(text) if fmt == "json" else text


def run_config(config, *, threads=0, fmt="json", base_dir="."):
    """Runs the n-axis sweep of a config (dict or path). JSON reports come back as dicts."""
    text, base = _prepare(config, base_dir)
    return _decode(_wcopt.run_config(text, base, threads, fmt), fmt)


def sweep(config, axis, *, threads=0, fmt="json", base_dir="."):
    text, base = _prepare(config, base_dir)
    return _decode(_wcopt.sweep(text, axis, base, threads, fmt), fmt)


def enumerate_config(config, *, threads=0, fmt="json", base_dir="."):
    text, base = _prepare(config, base_dir)
    return _decode(_wcopt.enumerate(text, base, threads, fmt), fmt)


def normalize_config(config, *, base_dir="."):
    text, base = _prepare(config, base_dir)
    return json.loads(_wcopt.normalize_config(text, base))
