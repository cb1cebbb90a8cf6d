"""Uncorrelated LDA with Pillai-trace forward selection.

A Gaussian discriminant classifier built on simultaneous diagonalization
of the scatter matrices (well-defined even under perfect class
separation) plus a greedy variable-selection framework whose inclusion
threshold controls the family-wise type-I error.
"""

from .scatter import Dataset, ClassStats, ScatterFactors, class_stats, scatter_factors
from .stats import (
    ThresholdSpec,
    pillai_trace,
    pillai_increment,
    wilks_lambda,
    partial_wilks,
    partial_f,
    selection_threshold,
    SingularMatrixError,
    IllDefinedPartialWilksError,
    MaxTraceReachedError,
)
from .special import beta_cdf, beta_quantile, f_cdf, f_sf, f_quantile
from .model import (
    UldaClassifier,
    fit_ulda,
    complete_orthogonal_decomposition,
    zero_one_costs,
    validate_cost_matrix,
)
from .selection import (
    Criterion,
    StopReason,
    SelectionConfig,
    SelectionResult,
    StepRecord,
    VariableRanking,
    forward_select,
    rank_variables,
    ForwardSelector,
)
from .preprocess import Recipe, TableEncoder, fit_recipe, apply_recipe
from .datasets import load_iris_frame, load_iris_arrays

__version__ = "0.1.0"

__all__ = [
    "Dataset", "ClassStats", "ScatterFactors", "class_stats", "scatter_factors",
    "ThresholdSpec", "pillai_trace", "pillai_increment", "wilks_lambda",
    "partial_wilks", "partial_f", "selection_threshold",
    "SingularMatrixError", "IllDefinedPartialWilksError", "MaxTraceReachedError",
    "beta_cdf", "beta_quantile", "f_cdf", "f_sf", "f_quantile",
    "UldaClassifier", "fit_ulda", "complete_orthogonal_decomposition",
    "zero_one_costs", "validate_cost_matrix",
    "Criterion", "StopReason", "SelectionConfig", "SelectionResult", "StepRecord",
    "VariableRanking", "forward_select", "rank_variables", "ForwardSelector",
    "Recipe", "TableEncoder", "fit_recipe", "apply_recipe",
    "load_iris_frame", "load_iris_arrays",
    "__version__",
]
