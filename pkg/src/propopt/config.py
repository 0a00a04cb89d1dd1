"""Single INI-style config file covering solver, space, and GA settings.

Floats are serialized with repr so a save/load cycle is value-exact; the
canonical serialized form also feeds the config hash recorded in run
manifests.
"""

from __future__ import annotations

import configparser
import hashlib
import io
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigurationError
from .ga import GaConfig
from .solver import SolverOptions
from .space import DesignSpaceConfig


@dataclass(frozen=True)
class ToolkitConfig:
    """The three tunable blocks behind every command."""

    solver: SolverOptions = SolverOptions()
    space: DesignSpaceConfig = DesignSpaceConfig()
    ga: GaConfig = GaConfig()

    def validate(self) -> None:
        self.solver.validate()
        self.space.validate()
        self.ga.validate()


_SOLVER_FIELDS = {
    "max_iterations": int,
    "relaxation": float,
    "tolerance": float,
    "station_count": int,
    "density": float,
}

_SPACE_RANGE_FIELDS = ("thrust_range", "speed_range", "rpm_range",
                       "diameter_range", "hub_ratio_range")

_GA_FIELDS = {
    "population_size": int,
    "eval_budget": int,
    "tournament_size": int,
    "crossover_prob": float,
    "mutation_prob": float,
    "mutation_sigma_frac": float,
    "elite_count": int,
    "rng_seed": int,
}


def _format_pair(pair) -> str:
    return f"{pair[0]!r}, {pair[1]!r}"


def _parse_pair(text: str, key: str) -> tuple[float, float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigurationError(f"{key}: expected 'min, max', got {text!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise ConfigurationError(f"{key}: non-numeric bound in {text!r}") from None


def config_to_string(cfg: ToolkitConfig) -> str:
    """Canonical INI serialization (stable key order)."""
    parser = configparser.ConfigParser()
    parser["solver"] = {
        "max_iterations": str(cfg.solver.max_iterations),
        "relaxation": repr(cfg.solver.relaxation),
        "tolerance": repr(cfg.solver.tolerance),
        "station_count": str(cfg.solver.station_count),
        "density": repr(cfg.solver.density),
    }
    space = {}
    for name in _SPACE_RANGE_FIELDS:
        space[name] = _format_pair(getattr(cfg.space, name))
    space["blade_counts"] = ", ".join(str(z) for z in cfg.space.blade_counts)
    space["chord_catalog"] = ", ".join(
        f"{c!r}:{t!r}" for c, t in cfg.space.chord_catalog)
    space["rng_seed"] = str(cfg.space.rng_seed)
    parser["space"] = space
    parser["ga"] = {name: (repr(getattr(cfg.ga, name)) if kind is float
                           else str(getattr(cfg.ga, name)))
                    for name, kind in _GA_FIELDS.items()}
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def save_config(cfg: ToolkitConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(config_to_string(cfg))


def config_hash(cfg: ToolkitConfig) -> str:
    """sha256 of the canonical serialization; identifies a run's settings."""
    return hashlib.sha256(config_to_string(cfg).encode()).hexdigest()


def load_config(path) -> ToolkitConfig:
    """Read an INI config; absent sections/keys keep their defaults."""
    parser = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from None

    known = {"solver", "space", "ga"}
    extra = set(parser.sections()) - known
    if extra:
        raise ConfigurationError(f"{path}: unknown sections {sorted(extra)}")

    solver = _load_solver(parser, path)
    space = _load_space(parser, path)
    ga = _load_ga(parser, path)
    cfg = ToolkitConfig(solver=solver, space=space, ga=ga)
    cfg.validate()
    return cfg


def _section(parser, name):
    return parser[name] if parser.has_section(name) else {}


def _convert(raw: str, kind, key: str):
    try:
        return kind(raw)
    except ValueError:
        raise ConfigurationError(f"{key}: cannot parse {raw!r}") from None


def _load_solver(parser, path) -> SolverOptions:
    section = _section(parser, "solver")
    values = {}
    for key, raw in section.items():
        if key not in _SOLVER_FIELDS:
            raise ConfigurationError(f"{path}: unknown solver key {key!r}")
        values[key] = _convert(raw, _SOLVER_FIELDS[key], key)
    return replace(SolverOptions(), **values)


def _load_space(parser, path) -> DesignSpaceConfig:
    section = _section(parser, "space")
    values = {}
    for key, raw in section.items():
        if key in _SPACE_RANGE_FIELDS:
            values[key] = _parse_pair(raw, key)
        elif key == "blade_counts":
            try:
                values[key] = tuple(int(p.strip()) for p in raw.split(","))
            except ValueError:
                raise ConfigurationError(
                    f"blade_counts: cannot parse {raw!r}") from None
        elif key == "chord_catalog":
            entries = []
            for item in raw.split(","):
                item = item.strip()
                if not item:
                    continue
                parts = item.split(":")
                if len(parts) != 2:
                    raise ConfigurationError(
                        f"chord_catalog: expected chord:taper, got {item!r}")
                try:
                    entries.append((float(parts[0]), float(parts[1])))
                except ValueError:
                    raise ConfigurationError(
                        f"chord_catalog: non-numeric entry {item!r}") from None
            values[key] = tuple(entries)
        elif key == "rng_seed":
            values[key] = _convert(raw, int, key)
        else:
            raise ConfigurationError(f"{path}: unknown space key {key!r}")
    return replace(DesignSpaceConfig(), **values)


def _load_ga(parser, path) -> GaConfig:
    section = _section(parser, "ga")
    values = {}
    for key, raw in section.items():
        if key not in _GA_FIELDS:
            raise ConfigurationError(f"{path}: unknown ga key {key!r}")
        values[key] = _convert(raw, _GA_FIELDS[key], key)
    return replace(GaConfig(), **values)
