"""Scenario files: INI-style ``[parameters]``, ``[initial]``, ``[solver]`` sections.

Example::

    [scenario]
    label = informed baseline

    [parameters]
    rho = 0.07      # anything missing falls back to the baseline
    nu_b = 0.025

    [initial]
    s = 184
    i = 1

    [solver]
    method = rk4
    dt = 0.01
    t_end = 200
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field

import numpy as np

from ..integrate import SolverConfig
from ..model import PARAMETER_NAMES, STATE_NAMES, ModelError, Parameters, State

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SweepSpec",
    "DEFAULT_INITIAL",
    "SOLVER_KEYS",
    "parse_config",
    "format_config",
    "apply_overrides",
]

DEFAULT_INITIAL = State(184.0, 1.0, 0.0, 100.0)
SOLVER_KEYS = ("method", "dt", "t_end", "rtol", "atol", "max_steps", "steady_tol", "record_every")
_INT_KEYS = {"max_steps", "record_every"}
_SECTIONS = {
    "scenario": ("label",),
    "parameters": PARAMETER_NAMES,
    "initial": STATE_NAMES,
    "solver": SOLVER_KEYS,
}


class ConfigError(ValueError):
    """Parse or validation failure in a scenario document."""


@dataclass(frozen=True)
class ScenarioConfig:
    parameters: Parameters = field(default_factory=Parameters)
    initial: State = DEFAULT_INITIAL
    solver: SolverConfig = field(default_factory=SolverConfig)
    label: str = "baseline"

    def __post_init__(self):
        if not self.label.strip():
            raise ConfigError("label must be non-empty")


@dataclass(frozen=True)
class SweepSpec:
    parameter_name: str
    values: tuple[float, ...]
    base: ScenarioConfig = field(default_factory=ScenarioConfig)

    def __post_init__(self):
        if self.parameter_name not in PARAMETER_NAMES:
            raise ConfigError(f"unknown sweep parameter {self.parameter_name!r}")
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ConfigError("sweep needs at least one value")
        object.__setattr__(self, "values", values)
        for v in values:
            try:
                self.base.parameters.replace(**{self.parameter_name: v})
            except ModelError as exc:
                raise ConfigError(f"swept value {v!r}: {exc}") from exc

    @classmethod
    def grid(cls, parameter_name, start, stop, count, base=None) -> SweepSpec:
        if count < 2:
            raise ConfigError("grid count must be >= 2")
        values = tuple(float(v) for v in np.linspace(start, stop, int(count)))
        return cls(parameter_name, values, base or ScenarioConfig())

    def scenarios(self):
        for v in self.values:
            params = self.base.parameters.replace(**{self.parameter_name: v})
            yield v, dataclasses.replace(self.base, parameters=params, label=f"{self.parameter_name}={v!r}")


def _number(section, key, raw):
    try:
        if key in _INT_KEYS:
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        return float(raw)
    except ValueError:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from None


def _build(values: dict[str, dict[str, object]]) -> ScenarioConfig:
    try:
        params = Parameters(**values["parameters"])
    except ModelError as exc:
        raise ConfigError(f"[parameters] {exc}") from exc
    init = {**dataclasses.asdict(DEFAULT_INITIAL), **values["initial"]}
    try:
        initial = State(**init)
    except ModelError as exc:
        raise ConfigError(f"[initial] {exc}") from exc
    try:
        solver = SolverConfig(**values["solver"])
    except ValueError as exc:
        raise ConfigError(f"[solver] {exc}") from exc
    label = str(values["scenario"].get("label", "baseline"))
    return ScenarioConfig(params, initial, solver, label)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a scenario document.

    Missing keys take their defaults; unknown sections or keys are errors.
    """
    parser = configparser.ConfigParser(
        delimiters=("=",), comment_prefixes=("#",), inline_comment_prefixes=("#",),
        interpolation=None, default_section="\0",
    )
    try:
        parser.read_string(text)
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: key outside of any section: {exc.line.strip()!r}") from None
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate key {exc.option!r} in [{exc.section}]") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate section [{exc.section}]") from None
    except configparser.ParsingError as exc:
        lineno, line = exc.errors[0]
        raise ConfigError(f"line {lineno}: cannot parse {line.strip()!r}") from None

    values: dict[str, dict[str, object]] = {name: {} for name in _SECTIONS}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SECTIONS[section]:
                raise ConfigError(f"[{section}] unknown key {key!r}")
            if section == "scenario" or key == "method":
                values[section][key] = raw.strip()
            else:
                values[section][key] = _number(section, key, raw)
    return _build(values)


def format_config(cfg: ScenarioConfig) -> str:
    """Serialise a config so that :func:`parse_config` reproduces it exactly."""
    lines = ["[scenario]", f"label = {cfg.label}", "", "[parameters]"]
    lines += [f"{k} = {v!r}" for k, v in cfg.parameters.as_dict().items()]
    lines += ["", "[initial]"]
    lines += [f"{k} = {getattr(cfg.initial, k)!r}" for k in STATE_NAMES]
    lines += ["", "[solver]"]
    lines += [f"{k} = {getattr(cfg.solver, k)!s}" if k == "method" else f"{k} = {getattr(cfg.solver, k)!r}"
              for k in SOLVER_KEYS]
    return "\n".join(lines) + "\n"


def apply_overrides(cfg: ScenarioConfig, overrides) -> ScenarioConfig:
    """Apply ``key=value`` strings; keys may be bare or ``section.key``."""
    values = {
        "scenario": {"label": cfg.label},
        "parameters": cfg.parameters.as_dict(),
        "initial": dataclasses.asdict(cfg.initial),
        "solver": {k: getattr(cfg.solver, k) for k in SOLVER_KEYS},
    }
    for item in overrides:
        key, sep, raw = item.partition("=")
        key, raw = key.strip(), raw.strip()
        if not sep:
            raise ConfigError(f"override {item!r} is not of the form key=value")
        section, _, name = key.rpartition(".")
        if section:
            if section not in _SECTIONS or name not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r}")
        else:
            owners = [s for s, keys in _SECTIONS.items() if name in keys]
            if not owners:
                raise ConfigError(f"unknown key {key!r}")
            section = owners[0]
        if section == "scenario" or name == "method":
            values[section][name] = raw
        else:
            values[section][name] = _number(section, name, raw)
    return _build(values)
