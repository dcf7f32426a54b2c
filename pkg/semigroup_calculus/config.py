import os
import json
import logging
from dataclasses import dataclass, fields, asdict
from dotenv import load_dotenv
from semigroup_calculus.errors import ConfigError


APP_DIR = os.path.dirname(os.path.abspath(__file__))
DOTENV_PATH = os.path.join(APP_DIR, ".env")
ENV_PREFIX = "SEMIGROUP_"
QUADRATURE_RULES = ("simpson", "trapezoid")

LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class Settings:
    """Numerical knobs shared by every module.

    Time-domain integrals run on a uniform grid of ``step`` up to
    ``horizon``; vertical-line integrals use a uniform trapezoid rule of
    ``line_spacing`` out to ``line_extent``; resolvent Laplace integrals use
    Gauss-Legendre panels of ``panel_width`` and ``panel_order`` nodes.
    """
    step: float = 2.0 ** -10
    horizon: float = 40.0
    quadrature: str = "simpson"
    tail_tolerance: float = 1e-6
    resolvent_margin: float = 0.05
    resolvent_cutoff: float = 1e-12
    panel_width: float = 0.5
    panel_order: int = 16
    line_spacing: float = 0.05
    line_extent: float = 1024.0
    outer_nodes: int = 2 ** 15
    aliasing_tolerance: float = 1e-2
    overflow_guard: float = 1e12
    seed: int = 42

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError(f"step must be positive, got {self.step}")
        if not self.horizon > self.step:
            raise ConfigError(f"horizon {self.horizon} must exceed step {self.step}")
        if self.quadrature not in QUADRATURE_RULES:
            raise ConfigError(f"quadrature must be one of {QUADRATURE_RULES}, got {self.quadrature!r}")
        if self.panel_order < 2:
            raise ConfigError("panel_order must be at least 2")
        if not (self.line_spacing > 0 and self.line_extent > self.line_spacing):
            raise ConfigError("line_spacing must be positive and smaller than line_extent")
        if self.outer_nodes < 16:
            raise ConfigError("outer_nodes must be at least 16")


def config_path():
    return os.environ.get(ENV_PREFIX + "CONFIG", os.path.join(APP_DIR, "config.json"))


def load_config(path=None):
    path = path or config_path()
    if not os.path.exists(path):
        return {}
    with open(path, "r", encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from e


def save_config(cfg, path=None):
    path = path or config_path()
    if isinstance(cfg, Settings):
        cfg = asdict(cfg)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(cfg, f, indent=2, sort_keys=True)


def _coerce(field, raw):
    try:
        if field.type in ("int", int):
            return int(raw)
        if field.type in ("float", float):
            return float(raw)
        return str(raw)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value for {field.name}: {raw!r}") from e


def load_settings(path=None, **overrides):
    """Defaults, then the JSON config file, then SEMIGROUP_* environment keys."""
    # Re-read .env on every call so edits made between CLI runs are honoured.
    load_dotenv(DOTENV_PATH, override=False)
    known = {f.name: f for f in fields(Settings)}
    values = {}
    for key, raw in load_config(path).items():
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        values[key] = _coerce(known[key], raw)
    for name, field in known.items():
        raw = os.environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(field, raw)
    for key, raw in overrides.items():
        if key not in known:
            raise ConfigError(f"unknown configuration key {key!r}")
        values[key] = _coerce(known[key], raw)
    settings = Settings(**values)
    LOGGER.debug("Loaded settings %s", settings)
    return settings
