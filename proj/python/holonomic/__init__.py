"""Multiqubit Rydberg holonomic gate simulator."""

import json

import numpy as np

from ._core import (
    ConfigError,
    DimensionError,
    IntegrationError,
    ModelError,
    __version__,
    area_product,
    gate_fidelity,
    ideal_gate,
    interaction_mhz,
    list_scenarios,
    sensitivity,
    waveform,
)
from . import _core


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def validate_config(config):
    """Resolved config for a dict or JSON string; raises ConfigError."""
    return _core.validate_config(_text(config))


def run_scenario(config):
    """Run a scenario and return a dict with columns, rows and metadata."""
    return _core.run_scenario(_text(config))


def run_scenario_columns(config):
    """Run a scenario and return {column: 1-D array}."""
    t = run_scenario(config)
    rows = np.asarray(t["rows"])
    return {name: rows[:, i] for i, name in enumerate(t["columns"])}


__all__ = [
    "ConfigError",
    "DimensionError",
    "IntegrationError",
    "ModelError",
    "__version__",
    "area_product",
    "gate_fidelity",
    "ideal_gate",
    "interaction_mhz",
    "list_scenarios",
    "run_scenario",
    "run_scenario_columns",
    "sensitivity",
    "validate_config",
    "waveform",
]
