"""Solvers for the reliable facility location problem."""
from .core import (
    Allocation,
    EvaluatedSolution,
    Evaluator,
    FeasibilityError,
    Instance,
    ModelConfig,
    decode_allocation,
    distance,
    evaluate,
    is_feasible,
    nearest_order,
    repair,
    verify_allocation,
)
from .eamls import EamlsConfig, run_eamls
from .evolve import GAConfig, RunReport, run_ga
from .instgen import GenParams, generate_instance, read_instance, write_instance
from .oracle import brute_force_optimum, independent_evaluate
from .stats import wilcoxon_signed_rank

__version__ = "0.1.0"
