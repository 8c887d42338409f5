"""Experiment configuration: one INI-style file, sections with strict key checking."""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .errors import ConfigError
from .params import DEFAULT_PARAMS, PhysicalParams, physical_params_from_mapping

_KNOWN_KEYS = {
    "physical": {"R", "gamma", "kappa", "tau", "nu_tilde", "eta_tilde",
                 "rho_star", "theta_star"},
    "grid": {"N", "L"},
    "time": {"tmax", "dt", "cfl", "monitor_every"},
    "data": {"kind", "mu0", "r0", "R0", "amplitude", "width", "seed", "band",
             "components"},
    "fit": {"t_min", "t_max", "n_points"},
    "output": {"dir", "plot"},
}

_FLOAT_KEYS = {"tmax", "dt", "cfl", "L", "mu0", "r0", "R0", "amplitude", "width",
               "t_min", "t_max"}
_INT_KEYS = {"N", "monitor_every", "seed", "band", "n_points"}
_BOOL_KEYS = {"plot"}


@dataclass
class ExperimentConfig:
    """Resolved configuration; sections are plain dicts with typed values."""

    physical: PhysicalParams = DEFAULT_PARAMS
    grid: dict = field(default_factory=dict)
    time: dict = field(default_factory=dict)
    data: dict = field(default_factory=dict)
    fit: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def resolved(self) -> dict:
        """Full config as a JSON-serializable mapping (embedded in reports)."""
        return {
            "physical": {k: getattr(self.physical, k) for k in _KNOWN_KEYS["physical"]},
            "grid": dict(self.grid),
            "time": dict(self.time),
            "data": dict(self.data),
            "fit": dict(self.fit),
            "output": dict(self.output),
        }


def _convert(key: str, value: str):
    try:
        if key in _FLOAT_KEYS:
            return float(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _BOOL_KEYS:
            return value.strip().lower() in ("1", "true", "yes", "on")
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from exc
    return value


def load_config(path) -> ExperimentConfig:
    """Parse the experiment file; unknown sections or keys are errors."""
    parser = configparser.ConfigParser()
    parser.optionxform = str          # keys are case-sensitive (N vs n)
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    cfg = ExperimentConfig()
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        items = dict(parser.items(section))
        unknown = sorted(set(items) - _KNOWN_KEYS[section])
        if unknown:
            raise ConfigError(
                f"unknown keys in [{section}]: {', '.join(unknown)}")
        if section == "physical":
            cfg.physical = physical_params_from_mapping(items)
        else:
            setattr(cfg, section, {k: _convert(k, v) for k, v in items.items()})
    return cfg
