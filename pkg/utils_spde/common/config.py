# Copyright (c) SPDE Lab contributors. All rights reserved.
# Licensed under the MIT License.

"""Experiment configuration: nested JSON file, CLI overrides, validation."""

import copy
import json
import logging
from dataclasses import asdict, dataclass, fields, replace

from utils_spde.common.exceptions import ConfigInvalid, InvalidArgument

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240601

# JSON section of every field; fields absent from the map live at top level.
SECTIONS = {
    "model": ("alpha", "d", "noise", "sigma", "u0"),
    "grid": ("n_cells", "n_modes", "epsilon"),
    "dynamics": ("lambdas", "times", "dt"),
    "sampling": ("n_paths", "seed", "batch_size", "num_workers", "p_list"),
    "oracle": ("oracle_dt", "n_max", "closure", "rho_list", "gronwall_k", "gronwall_c1"),
    "certify": ("certify_times", "delta"),
    "output": ("output_dir", "verbose"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved configuration of one experiment run."""

    alpha: float = 2.0
    d: int = 1
    noise: str = "white"
    sigma: str = "linear"
    u0: str = "constant:1"
    n_cells: int = 64
    n_modes: int = 32
    epsilon: float = 0.25
    lambdas: tuple = (1.0,)
    times: tuple = (0.1, 0.25, 0.5)
    dt: float = 1e-3
    n_paths: int = 1000
    seed: int = DEFAULT_SEED
    batch_size: int = 128
    num_workers: int = 1
    p_list: tuple = (2, 4)
    oracle_dt: float = 5e-3
    n_max: int = 8
    closure: str = "field"
    rho_list: tuple = (0.5, 2.0 / 3.0, 1.0)
    gronwall_k: float = 1.0
    gronwall_c1: float = 1.0
    certify_times: tuple = (0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0)
    delta: float = 0.1
    output_dir: str = "runs"
    verbose: bool = False

    @classmethod
    def from_dict(cls, data):
        """Builds a config from a nested dictionary.

        Args:
            data (dict): Mapping with the sections of `SECTIONS`; top-level keys with a
                field name are accepted too.

        Returns:
            ExperimentConfig: The config, not yet validated.
        """
        known = {f.name for f in fields(cls)}
        flat = {}
        for key, value in data.items():
            if key in SECTIONS:
                if not isinstance(value, dict):
                    raise ConfigInvalid("Section '{}' must be an object".format(key))
                for sub_key, sub_value in value.items():
                    if sub_key not in SECTIONS[key]:
                        raise ConfigInvalid("Unknown key '{}.{}'".format(key, sub_key))
                    flat[sub_key] = sub_value
            elif key in known:
                flat[key] = value
            else:
                raise ConfigInvalid("Unknown configuration key '{}'".format(key))
        return cls()._with(flat)

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf8") as f:
            try:
                data = json.load(f)
            except ValueError as e:
                raise ConfigInvalid("Cannot parse config file {}: {}".format(path, e))
        logger.info("Loaded configuration from {}".format(path))
        return cls.from_dict(data)

    def with_overrides(self, **overrides):
        """Returns a copy where every non-None override replaces the stored value."""
        return self._with({k: v for k, v in overrides.items() if v is not None})

    def _with(self, values):
        coerced = {}
        for f in fields(self):
            if f.name not in values:
                continue
            value = values[f.name]
            if isinstance(f.default, tuple):
                value = tuple(value) if isinstance(value, (list, tuple)) else (value,)
            coerced[f.name] = value
        return replace(self, **coerced)

    def to_dict(self):
        """Returns the nested dictionary layout used by config files."""
        flat = asdict(self)
        nested = {}
        for section, names in SECTIONS.items():
            nested[section] = {
                name: list(flat[name]) if isinstance(flat[name], tuple) else flat[name]
                for name in names
            }
        return copy.deepcopy(nested)

    def save(self, path):
        with open(path, "w", encoding="utf8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")

    def validate(self):
        """Checks the config invariants.

        Raises:
            ConfigInvalid: On the first violated invariant.
        """
        # Imported here: the noise package depends on common.
        from utils_spde.noise.models import dalang_condition, parse_model

        if self.d != 1:
            raise ConfigInvalid("Only d = 1 is simulated, got d={}".format(self.d))
        if not 1.0 < self.alpha <= 2.0:
            raise ConfigInvalid("alpha must lie in (1, 2], got {}".format(self.alpha))
        if not 0.0 < self.epsilon < 0.5:
            raise ConfigInvalid("epsilon must lie in (0, 1/2), got {}".format(self.epsilon))
        for name in ("n_cells", "n_modes", "n_paths", "batch_size", "n_max"):
            if int(getattr(self, name)) <= 0:
                raise ConfigInvalid("{} must be positive, got {}".format(name, getattr(self, name)))
        if self.num_workers != -1 and self.num_workers <= 0:
            raise ConfigInvalid(
                "num_workers must be positive or -1, got {}".format(self.num_workers)
            )
        if self.n_modes > self.n_cells or (self.alpha == 2.0 and self.n_modes >= self.n_cells):
            raise ConfigInvalid(
                "n_modes={} is too large for n_cells={}".format(self.n_modes, self.n_cells)
            )
        if self.dt <= 0 or self.oracle_dt <= 0:
            raise ConfigInvalid("Time steps must be positive")
        if any(t < 0 for t in self.times) or list(self.times) != sorted(self.times):
            raise ConfigInvalid(
                "Output times must be nonnegative and sorted: {}".format(self.times)
            )
        if any(lam < 0 for lam in self.lambdas):
            raise ConfigInvalid("Noise levels must be nonnegative: {}".format(self.lambdas))
        if any(p < 2 for p in self.p_list):
            raise ConfigInvalid("Moment orders must be >= 2: {}".format(self.p_list))
        if self.closure not in ("field", "diagonal"):
            raise ConfigInvalid(
                "closure must be 'field' or 'diagonal', got {}".format(self.closure)
            )
        try:
            model = parse_model(self.noise)
        except InvalidArgument as e:
            raise ConfigInvalid(str(e))
        if not dalang_condition(model, self.alpha, self.d):
            raise ConfigInvalid(
                "Dalang condition fails for noise '{}' at alpha={}".format(self.noise, self.alpha)
            )
        return self


def load_config(path=None, **overrides):
    """Loads, overrides and validates a configuration.

    Args:
        path (str, optional): JSON config file. Defaults are used when None.
        **overrides: Field values that take precedence over the file.

    Returns:
        ExperimentConfig: The validated config.
    """
    config = ExperimentConfig.from_json(path) if path else ExperimentConfig()
    return config.with_overrides(**overrides).validate()
