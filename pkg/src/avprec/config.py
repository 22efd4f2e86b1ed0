"""Experiment configuration: flat ``key = value`` files plus overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Optional

from .avmg import DELTA_RANGE
from .krylov import _METRIC_ALIASES

SOLVERS = ("minres-avmg", "minres-laplace", "minres-ideal", "gmres-mg", "bicgstab-mg")


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One solver run on the 2D (or 1D) model problem with ``h = 2**-fine_exponent``."""

    dim: int = 2
    fine_exponent: int = 8
    c2: float = 300.0
    delta: float = 1.0 / 3.0
    m_l: int = 10
    solver: str = "minres-avmg"
    restart: int = 20
    side: str = "left"
    tol: float = 1e-8
    maxit: int = 1000
    seed: int = 42
    early_coarse: bool = False
    metric: str = "error"
    output_path: str = "results"

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2, got {self.dim}")
        if self.fine_exponent < 2:
            raise ConfigError(f"fine_exponent must be >= 2, got {self.fine_exponent}")
        if not self.c2 > 0:
            raise ConfigError(f"c2 must be positive, got {self.c2}")
        lo, hi = DELTA_RANGE
        if not lo <= self.delta <= hi:
            raise ConfigError(f"delta must lie in [{lo}, {hi}], got {self.delta}")
        if self.m_l < 2:
            raise ConfigError(f"m_l must be >= 2, got {self.m_l}")
        if self.solver not in SOLVERS:
            raise ConfigError(f"solver must be one of {', '.join(SOLVERS)}; got {self.solver!r}")
        if self.restart < 1:
            raise ConfigError(f"restart must be >= 1, got {self.restart}")
        if self.side not in ("left", "right"):
            raise ConfigError(f"side must be 'left' or 'right', got {self.side!r}")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.maxit < 1:
            raise ConfigError(f"maxit must be >= 1, got {self.maxit}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.metric not in _METRIC_ALIASES:
            raise ConfigError(f"unknown metric {self.metric!r}")

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _convert(key: str, raw):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _FIELDS[key].type
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    try:
        if kind == "int":
            return int(text, 0)
        if kind == "float":
            # fractions such as 1/3 are accepted
            return float(Fraction(text)) if "/" in text else float(text)
        if kind == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
    except ValueError as exc:
        raise ConfigError(f"cannot parse {key} = {raw!r} as {kind}") from exc
    return text


def parse_config_text(text: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment, blank lines are ignored."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = _convert(key, value)
    return out


def load_config(path: Optional[str] = None, overrides: Optional[Mapping] = None,
                base: Optional[ExperimentConfig] = None) -> ExperimentConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (later wins)."""
    values = (base or ExperimentConfig()).as_dict()
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        values.update(parse_config_text(text))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _convert(key, value)
    try:
        return ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
