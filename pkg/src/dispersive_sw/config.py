"""Scenario configuration: dataclass, YAML loading, validation.

Config files are YAML mappings using exactly the documented keys below;
unknown keys are errors, not warnings.  Command-line flags override file
values.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigurationError

SCENARIOS = (
    "soliton",
    "manufactured",
    "lake_at_rest",
    "reflecting_bump",
    "traveling_wave",
    "dingemans",
)

MODELS = ("bbm_bbm", "svaerd_kalisch")


@dataclass
class ScenarioConfig:
    scenario: str
    model: str = "bbm_bbm"
    variant: str | None = None  # scenario default when None
    order: int = 4
    n_nodes: int | None = None
    t_end: float | None = None
    dt: float | None = None  # fixed step size; None means adaptive
    atol: float | None = None
    rtol: float | None = None
    relaxation: bool = False
    parameter_set: str | None = None  # Svärd-Kalisch coefficient set
    gauges: list = field(default_factory=list)
    gauge_interval: float = 0.1
    output_dir: str | None = None
    seed: int | None = None
    orders: list | None = None  # EOC mode: operator orders
    resolutions: list | None = None  # EOC mode: grid sizes
    eoc: bool = False
    check: bool = False
    experimental_data: str | None = None
    wavenumber: float = 0.8  # traveling-wave scenario
    reflecting: bool = False  # manufactured scenario: use wall conditions

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigurationError(
                f"unknown scenario {self.scenario!r}; available: {SCENARIOS}"
            )
        if self.model not in MODELS:
            raise ConfigurationError(
                f"unknown model {self.model!r}; available: {MODELS}"
            )
        if self.order <= 0:
            raise ConfigurationError("order must be positive")
        if self.dt is not None and self.dt <= 0:
            raise ConfigurationError("dt must be positive")
        for name in ("atol", "rtol"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.gauge_interval <= 0:
            raise ConfigurationError("gauge_interval must be positive")
        self.gauges = [float(gx) for gx in self.gauges]
        if self.orders is not None:
            self.orders = [int(p) for p in self.orders]
        if self.resolutions is not None:
            self.resolutions = [int(n) for n in self.resolutions]
            if any(b <= a for a, b in zip(self.resolutions, self.resolutions[1:])):
                raise ConfigurationError("resolutions must be strictly increasing")


_FIELD_NAMES = {f.name for f in dataclasses.fields(ScenarioConfig)}


def config_from_mapping(mapping) -> ScenarioConfig:
    unknown = set(mapping) - _FIELD_NAMES
    if unknown:
        raise ConfigurationError(
            f"unknown config keys {sorted(unknown)}; allowed: {sorted(_FIELD_NAMES)}"
        )
    if "scenario" not in mapping:
        raise ConfigurationError("config must name a scenario")
    return ScenarioConfig(**mapping)


def load_config_file(path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"could not parse config file {path}: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigurationError(f"config file {path} must hold a mapping")
    return data
