"""Finite-sample Gaussian laws for polygenic risk score accuracy and simulation checks."""

from __future__ import annotations

__version__ = "0.1.0"

from .asymptotics import (
    GaussianLimit,
    PopulationParams,
    confidence_interval,
    marginal_accuracy,
    marginal_accuracy_identity,
    marginal_individual,
    naive_accuracy,
    quadratic_form,
    reference_accuracy,
    reference_accuracy_identity,
    reference_individual,
    ridge_accuracy,
    ridge_accuracy_identity,
    ridge_individual,
    ridge_individual_identity,
)
from .errors import ConvergenceError, DegenerateLimitError, ReplicationError, ValidationError
from .estimators import Dataset, EffectVector, Estimate, accuracy, fit_marginal, fit_reference_ridge, fit_ridge, predict
from .simulate import ReplicationBatch, SimConfig, run_batch
from .spectral import CovarianceModel, CovSpec, build_covariance
from .stats import KsReport, coverage, ks_to_fitted_normal, ks_to_standard_normal, variance_ratio
from .stieltjes import StieltjesPoint, closed_form_identity, solve_fixed_point

__all__ = [
    "__version__",
    "GaussianLimit",
    "PopulationParams",
    "confidence_interval",
    "marginal_accuracy",
    "marginal_accuracy_identity",
    "marginal_individual",
    "naive_accuracy",
    "quadratic_form",
    "reference_accuracy",
    "reference_accuracy_identity",
    "reference_individual",
    "ridge_accuracy",
    "ridge_accuracy_identity",
    "ridge_individual",
    "ridge_individual_identity",
    "ConvergenceError",
    "DegenerateLimitError",
    "ReplicationError",
    "ValidationError",
    "Dataset",
    "EffectVector",
    "Estimate",
    "accuracy",
    "fit_marginal",
    "fit_reference_ridge",
    "fit_ridge",
    "predict",
    "ReplicationBatch",
    "SimConfig",
    "run_batch",
    "CovarianceModel",
    "CovSpec",
    "build_covariance",
    "KsReport",
    "coverage",
    "ks_to_fitted_normal",
    "ks_to_standard_normal",
    "variance_ratio",
    "StieltjesPoint",
    "closed_form_identity",
    "solve_fixed_point",
]
