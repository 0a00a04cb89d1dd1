"""Labeled design corpus: generation, persistence, and splitting.

Each record ties an operating requirement to a geometry and the solver's
efficiency for that pair.  Generation samples the configured spaces, runs
the solver, keeps feasible designs above an efficiency floor, and sorts the
kept records canonically so the corpus does not depend on worker scheduling.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DatasetFormatError, GenerationError
from .solver import BladeGeometry, Requirement, SolverOptions, evaluate
from .space import DesignSpaceConfig, default_config, sample_geometry, sample_requirement

CSV_HEADER = [
    "thrust_n", "speed_mps", "rpm", "blade_count", "diameter_m",
    "hub_diameter_m", "chord_root", "taper_exp", "cd", "efficiency",
]

DEFAULT_EFFICIENCY_FLOOR = 0.5
ATTEMPT_BUDGET_FACTOR = 20


@dataclass(frozen=True)
class DesignRecord:
    """One labeled sample: requirement, geometry, and achieved efficiency."""

    requirement: Requirement
    geometry: BladeGeometry
    efficiency: float

    def validate(self) -> None:
        self.requirement.validate()
        self.geometry.validate()
        if not (0.0 < self.efficiency < 1.0):
            raise DatasetFormatError(
                f"efficiency {self.efficiency} outside (0, 1)")

    def pair_key(self):
        """Canonical (requirement, geometry) tuple: sort key and dedupe key."""
        r, g = self.requirement, self.geometry
        return (r.thrust_req, r.ship_speed, r.rpm, g.blade_count, g.diameter,
                g.hub_diameter, g.chord_root, g.taper_exp,
                g.section_drag_coeff)


@dataclass
class Dataset:
    """A corpus of design records with its provenance."""

    records: list[DesignRecord]
    generation_config: DesignSpaceConfig = field(default_factory=default_config)
    efficiency_floor: float = 0.0

    def __len__(self) -> int:
        return len(self.records)


def _evaluate_pair(args) -> tuple[bool, float]:
    geom, req, options = args
    perf = evaluate(geom, req, options)
    return perf.feasible, perf.efficiency


def generate(cfg: DesignSpaceConfig, target_count: int,
             efficiency_floor: float = DEFAULT_EFFICIENCY_FLOOR,
             parallelism: int = 1,
             solver_options: SolverOptions = SolverOptions()) -> Dataset:
    """Sample, evaluate, and filter designs until target_count are kept.

    All random draws happen sequentially in the calling process (one
    requirement then one geometry per attempt), so the kept set depends only
    on cfg.rng_seed; parallelism only fans out the pure solver calls.  Gives
    up after 20x target_count attempts; raises if nothing was kept by then.
    """
    if target_count <= 0:
        raise GenerationError(f"target_count must be positive, got {target_count}")
    if not (0.0 <= efficiency_floor < 1.0):
        raise GenerationError(
            f"efficiency_floor must lie in [0, 1), got {efficiency_floor}")
    cfg.validate()
    solver_options.validate()

    rng = np.random.default_rng(cfg.rng_seed)
    budget = ATTEMPT_BUDGET_FACTOR * target_count
    block_size = max(256, 64 * max(1, parallelism))
    kept: list[DesignRecord] = []
    seen: set = set()
    attempts = 0

    pool = ProcessPoolExecutor(parallelism) if parallelism > 1 else None
    try:
        while len(kept) < target_count and attempts < budget:
            n = min(block_size, budget - attempts)
            pairs = []
            for _ in range(n):
                req = sample_requirement(cfg, rng)
                geom = sample_geometry(cfg, rng)
                pairs.append((geom, req, solver_options))
            attempts += n

            if pool is None:
                results = [_evaluate_pair(p) for p in pairs]
            else:
                results = list(pool.map(_evaluate_pair, pairs, chunksize=32))

            for (geom, req, _), (feasible, eta) in zip(pairs, results):
                if len(kept) >= target_count:
                    break
                if not feasible or eta < efficiency_floor:
                    continue
                record = DesignRecord(req, geom, eta)
                key = record.pair_key()
                if key in seen:
                    continue
                seen.add(key)
                kept.append(record)
    finally:
        if pool is not None:
            pool.shutdown()

    if not kept:
        raise GenerationError(
            f"no design kept after {attempts} attempts: efficiency_floor "
            f"{efficiency_floor} may be unreachable within the configured ranges")

    kept.sort(key=DesignRecord.pair_key)
    return Dataset(records=kept, generation_config=cfg,
                   efficiency_floor=efficiency_floor)


def save(ds: Dataset, path) -> None:
    """Write the corpus as UTF-8 CSV with roundtrip-exact decimals."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for rec in ds.records:
            r, g = rec.requirement, rec.geometry
            writer.writerow([
                "%.17g" % r.thrust_req,
                "%.17g" % r.ship_speed,
                "%.17g" % r.rpm,
                str(g.blade_count),
                "%.17g" % g.diameter,
                "%.17g" % g.hub_diameter,
                "%.17g" % g.chord_root,
                "%.17g" % g.taper_exp,
                "%.17g" % g.section_drag_coeff,
                "%.17g" % rec.efficiency,
            ])


def load(path, generation_config: DesignSpaceConfig | None = None,
         efficiency_floor: float = 0.0) -> Dataset:
    """Read a corpus CSV, checking schema and per-record invariants."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError(f"{path}: empty file, expected header row")
        if header != CSV_HEADER:
            raise DatasetFormatError(
                f"{path}: bad header {header!r}, expected {CSV_HEADER!r}")
        records: list[DesignRecord] = []
        seen: set = set()
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise DatasetFormatError(
                    f"{path}:{lineno}: expected {len(CSV_HEADER)} fields, "
                    f"got {len(row)}")
            try:
                req = Requirement(float(row[0]), float(row[1]), float(row[2]))
                geom = BladeGeometry(int(row[3]), float(row[4]), float(row[5]),
                                     float(row[6]), float(row[7]),
                                     float(row[8]))
                eta = float(row[9])
            except ValueError as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
            record = DesignRecord(req, geom, eta)
            try:
                record.validate()
            except Exception as exc:
                raise DatasetFormatError(f"{path}:{lineno}: {exc}") from None
            key = record.pair_key()
            if key in seen:
                raise DatasetFormatError(
                    f"{path}:{lineno}: duplicate (requirement, geometry) pair")
            seen.add(key)
            records.append(record)
    if generation_config is None:
        generation_config = default_config()
    return Dataset(records=records, generation_config=generation_config,
                   efficiency_floor=efficiency_floor)


def split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Random disjoint train/test partition, preserving record order."""
    if not (0.0 < test_fraction < 1.0):
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    n = len(ds.records)
    n_test = round(test_fraction * n)
    perm = np.random.default_rng(seed).permutation(n)
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    train = replace(ds, records=[ds.records[i] for i in train_idx])
    test = replace(ds, records=[ds.records[i] for i in test_idx])
    return train, test
