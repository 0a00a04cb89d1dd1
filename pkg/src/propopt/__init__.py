"""Propeller design optimization toolkit.

Lifting-line performance solver, inverse-design surrogates trained on
simulated data, and a surrogate-seeded genetic optimizer, with a CLI tying
them together.
"""

__version__ = "0.1.0"

from .errors import (
    ConfigurationError,
    DatasetFormatError,
    GenerationError,
    GeometryError,
    ModelDataMismatchError,
    ModelFormatError,
    PropoptError,
    TrainingError,
)
from .solver import (
    BladeGeometry,
    CirculationSolution,
    Performance,
    Requirement,
    SolverOptions,
    evaluate,
    ideal_efficiency,
    solve_optimal_circulation,
)
from .space import (
    DesignSpaceConfig,
    Genome,
    decode,
    default_config,
    encode,
    gene_bounds,
    sample_geometry,
    sample_requirement,
)
from .data import (
    Dataset,
    DesignRecord,
    generate,
    load,
    save,
    split,
)
from .surrogate import (
    EvalReport,
    RandomForest,
    RegressionTree,
    decode_target,
    evaluate_model,
    fit_forest,
    fit_tree,
    leaf_records,
    load_model,
    predict_forest,
    predict_tree,
    save_model,
)
from .ga import (
    BENCHMARK_REQUIREMENTS,
    GaConfig,
    OptimizationResult,
    OptimizationTrace,
    brute_force,
    enumeration_grid,
    load_trace,
    run_ga,
    run_sao,
    sao_seeds,
    write_trace,
)
from .config import (
    ToolkitConfig,
    config_hash,
    load_config,
    save_config,
)

__all__ = [
    "__version__",
    "PropoptError", "ConfigurationError", "GeometryError", "GenerationError",
    "DatasetFormatError", "TrainingError", "ModelFormatError",
    "ModelDataMismatchError",
    "Requirement", "BladeGeometry", "SolverOptions", "CirculationSolution",
    "Performance", "solve_optimal_circulation", "evaluate",
    "ideal_efficiency",
    "DesignSpaceConfig", "Genome", "default_config", "sample_requirement",
    "sample_geometry", "encode", "decode", "gene_bounds",
    "DesignRecord", "Dataset", "generate", "save", "load", "split",
    "RegressionTree", "RandomForest", "EvalReport", "fit_tree", "fit_forest",
    "predict_tree", "predict_forest", "leaf_records", "decode_target",
    "evaluate_model", "save_model", "load_model",
    "GaConfig", "OptimizationTrace", "OptimizationResult",
    "BENCHMARK_REQUIREMENTS", "run_ga", "run_sao", "sao_seeds", "brute_force",
    "enumeration_grid", "write_trace", "load_trace",
    "ToolkitConfig", "load_config", "save_config", "config_hash",
]
