"""Sectioned ``key = value`` config files for sweeps.

Example::

    [model]
    name = noon
    vis = 0.9
    phi = 0.2

    [sweep]
    m_values = logspace 10 450 25
    repetitions = 500
    betas = 2, 3, 4, 5
    seed = 2020

    [grid]
    points = 2048

Comments start with ``#`` or ``;``.  Errors carry ``path:line`` prefixes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .bayes import ParameterGrid
from .montecarlo import ExperimentConfig, default_m_values
from .statmodel import (
    DiscreteModel,
    DomainError,
    FeedbackInterferometerModel,
    NoonPhaseModel,
    TabulatedModel,
    TwoParamNoonModel,
)

SECTIONS = {
    "model": {"name", "vis", "phi"},
    "sweep": {"m_values", "repetitions", "betas", "seed"},
    "grid": {"points", "lower", "upper"},
}


class ConfigError(ValueError):
    pass


@dataclass
class RawConfig:
    path: str
    values: dict[tuple[str, str], str] = field(default_factory=dict)
    lines: dict[tuple[str, str], int] = field(default_factory=dict)

    def get(self, section, key, default=None):
        return self.values.get((section, key), default)

    def where(self, section, key) -> str:
        line = self.lines.get((section, key))
        return f"{self.path}:{line}" if line else f"{self.path}:[{section}] {key}"

    def set(self, section, key, value):
        self.values[(section, key)] = str(value)
        self.lines.pop((section, key), None)


def parse_text(text: str, path: str = "<config>") -> RawConfig:
    raw = RawConfig(path)
    section = None
    errors = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = re.split(r"\s[#;]|^[#;]", line, maxsplit=1)[0].strip()
        if not line:
            continue
        m = re.fullmatch(r"\[\s*(\w+)\s*\]", line)
        if m:
            section = m.group(1).lower()
            if section not in SECTIONS:
                errors.append(f"{path}:{lineno}: unknown section [{section}]")
            continue
        if "=" not in line:
            errors.append(f"{path}:{lineno}: expected 'key = value'")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if section is None:
            errors.append(f"{path}:{lineno}: '{key}' outside any section")
        elif section in SECTIONS and key not in SECTIONS[section]:
            errors.append(f"{path}:{lineno}: unknown key '{key}' in [{section}]")
        elif (section, key) in raw.values:
            errors.append(f"{path}:{lineno}: duplicate key '{key}' in [{section}]")
        else:
            raw.values[(section, key)] = value
            raw.lines[(section, key)] = lineno
    if errors:
        raise ConfigError("\n".join(errors))
    return raw


def parse_file(path) -> RawConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from None
    return parse_text(text, str(path))


def make_model(name: str, vis: float | None = None) -> DiscreteModel:
    """Model from a selector: ``noon``, ``noon2``, ``feedback`` or ``table:<path>``."""
    if name == "noon":
        return NoonPhaseModel(1.0 if vis is None else float(vis))
    if name == "noon2":
        return TwoParamNoonModel()
    if name == "feedback":
        return FeedbackInterferometerModel()
    if name.startswith("table:"):
        return TabulatedModel.from_file(name[len("table:"):])
    raise DomainError(f"unknown model '{name}' (noon, noon2, feedback, table:<path>)")


def parse_m_values(text: str) -> tuple[int, ...]:
    parts = text.replace(",", " ").split()
    if parts and parts[0] == "logspace":
        if len(parts) != 4:
            raise ValueError("expected 'logspace <lo> <hi> <count>'")
        return default_m_values(int(parts[1]), int(parts[2]), int(parts[3]))
    return tuple(int(p) for p in parts)


def parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.replace(",", " ").split())


def build_experiment(raw: RawConfig) -> ExperimentConfig:
    """Validate a parsed config and build the experiment it describes."""
    errors = []

    def convert(section, key, fn, default):
        value = raw.get(section, key)
        if value is None:
            return default
        try:
            return fn(value)
        except (ValueError, DomainError) as exc:
            errors.append(f"{raw.where(section, key)}: bad {key} '{value}': {exc}")
            return default

    def visibility(text):
        v = float(text)
        if not 0.0 <= v <= 1.0:
            raise ValueError("visibility outside [0, 1]")
        return v

    vis = convert("model", "vis", visibility, None)
    phi = convert("model", "phi", parse_floats, None)
    name = raw.get("model", "name", "noon")
    m_values = convert("sweep", "m_values", parse_m_values, default_m_values())
    reps = convert("sweep", "repetitions", int, 500)
    betas = convert("sweep", "betas", parse_floats, (2.0, 3.0, 4.0, 5.0))
    seed = convert("sweep", "seed", int, 0)
    points = convert("grid", "points", int, 2048)
    lower = convert("grid", "lower", float, None)
    upper = convert("grid", "upper", float, None)

    model = None
    try:
        model = make_model(name, vis)
    except (DomainError, OSError) as exc:
        errors.append(f"{raw.where('model', 'name')}: {exc}")
    if phi is None:
        errors.append(f"{raw.path}: [model] phi (true parameter) is required")
    if errors:
        raise ConfigError("\n".join(errors))

    try:
        lo, hi = model.domain
        grid = ParameterGrid(lo if lower is None else lower, hi if upper is None else upper, points)
    except DomainError as exc:
        raise ConfigError(f"{raw.where('grid', 'points')}: {exc}") from None
    try:
        return ExperimentConfig(model, phi, m_values, reps, betas, seed, grid)
    except DomainError as exc:
        raise ConfigError(f"{raw.path}: {exc}") from None


def describe(config: ExperimentConfig, model_name: str) -> dict:
    """Fully resolved config as plain data (for manifests)."""
    g = config.grid
    return {
        "model": model_name,
        "vis": getattr(config.model, "vis", None),
        "true_params": list(config.true_params),
        "m_values": list(config.m_values),
        "repetitions": config.repetitions,
        "betas": list(config.betas),
        "seed": config.seed,
        "grid": {"lower": g.lower, "upper": g.upper, "points": g.n},
    }
