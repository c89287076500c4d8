"""High-dimensional Bayesian optimization with adaptive variable dropout.

The package bundles an ordinary-kriging surrogate, expected-improvement
acquisitions (full-space and subspace-restricted), a real-coded genetic
inner optimizer, four outer loops (standard BO, adaptive dropout, fixed
dropout, coordinate line search), an analytic benchmark suite with an
external-process protocol, and a reproducible multi-seed experiment
harness with Wilcoxon signed-rank comparisons.
"""

from .acquisition import (
    AcquisitionContext,
    compose_point,
    essi,
    essi_batch,
    expected_improvement,
    expected_improvement_batch,
)
from .errors import (
    ConfigurationError,
    EvaluationError,
    ModelError,
    OptimizationError,
)
from .ga import GaBudget, GaConfig, ga_budget
from .ga import maximize as ga_maximize
from .gp import Archive, GpModel, Prediction, concentrated_nll, fit, predict, predict_batch, rbf_corr
from .harness import (
    ExperimentConfig,
    compare_traces,
    emit_convergence_plot,
    load_config,
    read_trace,
    run_experiment,
    write_trace,
)
from .objectives import (
    ExternalObjective,
    ObjectiveSpec,
    default_box,
    evaluate,
    make_objective,
    minimizer,
)
from .optimizers import (
    ALGORITHMS,
    OptimizerConfig,
    RunTrace,
    run,
    run_adadropout,
    run_coordinate_line_bo,
    run_dropout_baseline,
    run_standard_bo,
    update_dimension,
    update_incumbent,
)
from .sampling import RngState, SearchBox, lhs_sample, random_rotation, select_subspace
from .stats import ComparisonVerdict, Summary, summarize, wilcoxon_signed_rank

__version__ = "0.1.0"

__all__ = [
    "AcquisitionContext",
    "ALGORITHMS",
    "Archive",
    "ComparisonVerdict",
    "ConfigurationError",
    "EvaluationError",
    "ExperimentConfig",
    "ExternalObjective",
    "GaBudget",
    "GaConfig",
    "GpModel",
    "ModelError",
    "ObjectiveSpec",
    "OptimizationError",
    "OptimizerConfig",
    "Prediction",
    "RngState",
    "RunTrace",
    "SearchBox",
    "Summary",
    "compare_traces",
    "compose_point",
    "concentrated_nll",
    "default_box",
    "emit_convergence_plot",
    "essi",
    "essi_batch",
    "evaluate",
    "expected_improvement",
    "expected_improvement_batch",
    "fit",
    "ga_budget",
    "ga_maximize",
    "lhs_sample",
    "load_config",
    "make_objective",
    "minimizer",
    "predict",
    "predict_batch",
    "random_rotation",
    "rbf_corr",
    "read_trace",
    "run",
    "run_adadropout",
    "run_coordinate_line_bo",
    "run_dropout_baseline",
    "run_experiment",
    "run_standard_bo",
    "select_subspace",
    "summarize",
    "update_dimension",
    "update_incumbent",
    "wilcoxon_signed_rank",
    "write_trace",
]
