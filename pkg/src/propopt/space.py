"""Requirement and geometry design spaces.

Holds the sampled ranges, the chord-profile catalog used for data
generation, and the real-vector genome encoding used by the optimizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .solver import BladeGeometry, Requirement

DEFAULT_CHORD_ROOTS = (0.10, 0.15, 0.20)
DEFAULT_TAPER_EXPS = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class DesignSpaceConfig:
    """Bounds of the requirement space and the geometry space."""

    thrust_range: tuple[float, float] = (10e3, 500e3)
    speed_range: tuple[float, float] = (5.0, 20.0)
    rpm_range: tuple[float, float] = (500.0, 4000.0)
    diameter_range: tuple[float, float] = (0.5, 4.0)
    hub_ratio_range: tuple[float, float] = (0.15, 0.30)
    blade_counts: tuple[int, ...] = (3, 4, 5, 6)
    chord_catalog: tuple[tuple[float, float], ...] = tuple(
        (c, t) for c in DEFAULT_CHORD_ROOTS for t in DEFAULT_TAPER_EXPS
    )
    rng_seed: int = 0

    def validate(self) -> None:
        for name in ("thrust_range", "speed_range", "rpm_range",
                     "diameter_range", "hub_ratio_range"):
            lo, hi = getattr(self, name)
            if not (lo < hi):
                raise ConfigurationError(f"{name} must satisfy min < max, got {lo}..{hi}")
        if len(self.blade_counts) == 0:
            raise ConfigurationError("blade_counts must be nonempty")
        if len(self.chord_catalog) == 0:
            raise ConfigurationError("chord_catalog must be nonempty")
        for c, t in self.chord_catalog:
            if not (0.02 <= c <= 0.4 and 0.25 <= t <= 4.0):
                raise ConfigurationError(f"catalog entry ({c}, {t}) out of range")

    def chord_root_bounds(self) -> tuple[float, float]:
        """Bounding interval of catalog chord_root values (GA gene range)."""
        roots = [c for c, _ in self.chord_catalog]
        return min(roots), max(roots)

    def taper_exp_bounds(self) -> tuple[float, float]:
        """Bounding interval of catalog taper_exp values (GA gene range)."""
        exps = [t for _, t in self.chord_catalog]
        return min(exps), max(exps)


def default_config() -> DesignSpaceConfig:
    """Default space: thrust 10-500 kN, 5-20 m/s, 500-4000 rpm, nine chord profiles."""
    return DesignSpaceConfig()


@dataclass(frozen=True)
class Genome:
    """Real-vector optimizer encoding of one geometry.

    values = (diameter, hub_ratio, chord_root, taper_exp); blade_index picks
    into the configured blade_counts tuple.
    """

    values: tuple[float, float, float, float]
    blade_index: int


def sample_requirement(cfg: DesignSpaceConfig, rng: np.random.Generator) -> Requirement:
    """Uniform requirement sample inside the configured ranges."""
    return Requirement(
        thrust_req=rng.uniform(*cfg.thrust_range),
        ship_speed=rng.uniform(*cfg.speed_range),
        rpm=rng.uniform(*cfg.rpm_range),
    )


def sample_geometry(cfg: DesignSpaceConfig, rng: np.random.Generator) -> BladeGeometry:
    """Uniform geometry sample: continuous diameter/hub, catalog chord profile."""
    diameter = rng.uniform(*cfg.diameter_range)
    hub_ratio = rng.uniform(*cfg.hub_ratio_range)
    chord_root, taper_exp = cfg.chord_catalog[rng.integers(len(cfg.chord_catalog))]
    blade_count = int(cfg.blade_counts[rng.integers(len(cfg.blade_counts))])
    return BladeGeometry(
        blade_count=blade_count,
        diameter=diameter,
        hub_diameter=hub_ratio * diameter,
        chord_root=chord_root,
        taper_exp=taper_exp,
    )


def encode(geom: BladeGeometry, cfg: DesignSpaceConfig) -> Genome:
    """Geometry to genome; blade_count becomes an index into cfg.blade_counts."""
    try:
        blade_index = cfg.blade_counts.index(geom.blade_count)
    except ValueError:
        raise ConfigurationError(
            f"blade_count {geom.blade_count} not in configured counts {cfg.blade_counts}"
        ) from None
    return Genome(
        values=(geom.diameter, geom.hub_ratio, geom.chord_root, geom.taper_exp),
        blade_index=blade_index,
    )


def _clamp(x: float, lo: float, hi: float) -> float:
    return lo if x < lo else hi if x > hi else x


def decode(genome: Genome, cfg: DesignSpaceConfig) -> BladeGeometry:
    """Genome to geometry, clamping every gene into its configured range."""
    d, hr, cr, te = genome.values
    diameter = _clamp(d, *cfg.diameter_range)
    hub_ratio = _clamp(hr, *cfg.hub_ratio_range)
    chord_root = _clamp(cr, *cfg.chord_root_bounds())
    taper_exp = _clamp(te, *cfg.taper_exp_bounds())
    blade_index = int(_clamp(genome.blade_index, 0, len(cfg.blade_counts) - 1))
    return BladeGeometry(
        blade_count=int(cfg.blade_counts[blade_index]),
        diameter=diameter,
        hub_diameter=hub_ratio * diameter,
        chord_root=chord_root,
        taper_exp=taper_exp,
    )


def gene_bounds(cfg: DesignSpaceConfig) -> list[tuple[float, float]]:
    """Per-gene (lo, hi) for the four real genes, in genome order."""
    return [
        cfg.diameter_range,
        cfg.hub_ratio_range,
        cfg.chord_root_bounds(),
        cfg.taper_exp_bounds(),
    ]
