from .commands import cmd_analyze, cmd_compare, cmd_phase, cmd_simulate, cmd_sweep
from .config import ConfigError, ScenarioConfig, SweepSpec, apply_overrides, format_config, parse_config
from .main import main

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "SweepSpec",
    "apply_overrides",
    "cmd_analyze",
    "cmd_compare",
    "cmd_phase",
    "cmd_simulate",
    "cmd_sweep",
    "format_config",
    "main",
    "parse_config",
]
