import itertools
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace

from .catport_error import ConfigError
from .teleport_protocol import MIN_MEAN_PHOTON

logger = logging.getLogger(__name__)

FORMATS = ("csv", "json")
MAX_TAIL = 1e-6


def default_alpha_sq_grid():
    return [0.5 * k for k in range(1, 61)]


def default_theta_grid():
    return [math.pi * k / 8.0 for k in range(9)]


def default_phi_grid():
    return [0.0, math.pi / 2.0]


@dataclass
class SweepConfig:
    alpha_sq_grid: list = field(default_factory=default_alpha_sq_grid)
    theta_grid: list = field(default_factory=default_theta_grid)
    phi_grid: list = field(default_factory=default_phi_grid)
    truncation_tail: float = 1e-12
    outputs: str = "out"
    format: str = "csv"
    workers: int = 1

    def validate(self):
        for name in ("alpha_sq_grid", "theta_grid", "phi_grid"):
            values = getattr(self, name)
            if not values:
                raise ConfigError(f"{name} is empty")
            if not all(math.isfinite(value) for value in values):
                raise ConfigError(f"{name} holds a non-finite value")
        if min(self.alpha_sq_grid) < MIN_MEAN_PHOTON:
            raise ConfigError(f"alpha_sq values must be >= {MIN_MEAN_PHOTON:g}, got {min(self.alpha_sq_grid)}")
        if not 0 < self.truncation_tail <= MAX_TAIL:
            raise ConfigError(f"truncation_tail must lie in (0, {MAX_TAIL}], got {self.truncation_tail}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}, got {self.format!r}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")
        return self

    def grid(self):
        return list(itertools.product(self.alpha_sq_grid, self.theta_grid, self.phi_grid))

    def with_overrides(self, **overrides):
        return replace(self, **{key: value for key, value in overrides.items() if value is not None})

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        try:
            values = dict(data)
            for name in ("alpha_sq_grid", "theta_grid", "phi_grid"):
                if name in values:
                    values[name] = [float(value) for value in values[name]]
            if "truncation_tail" in values:
                values["truncation_tail"] = float(values["truncation_tail"])
            if "workers" in values:
                values["workers"] = int(values["workers"])
            if "outputs" in values:
                values["outputs"] = str(values["outputs"])
        except (TypeError, ValueError) as e:
            raise ConfigError("malformed config value", e)
        return cls(**values).validate()

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text, defaults=None):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError("config is not valid JSON", e)
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict({**(defaults or {}), **data})

    @classmethod
    def load(cls, path, defaults=None):
        """Read a JSON config file; keys it leaves out come from defaults, then the field defaults."""
        try:
            with open(path, "r", encoding="utf-8") as handle:
                text = handle.read()
        except OSError as e:
            raise ConfigError(f"cannot read config {path}", e)
        config = cls.from_json(text, defaults)
        logger.info(f"loaded sweep config from {path}: {len(config.grid())} grid points")
        return config
