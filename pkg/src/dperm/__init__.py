"""Differentially private empirical risk minimization by localized posterior
sampling, with output-perturbation and noisy-GD baselines."""

__version__ = "0.1.0"

from .erm import Dataset, LossModel, RegularityBounds, certify_bounds, exact_minimizer
from .privacy import NoiseSpec, PrivacyBudget, compose, pure_to_gdp
from .pipeline import PipelineConfig, run_localized_asap

__all__ = [
    "Dataset",
    "LossModel",
    "RegularityBounds",
    "NoiseSpec",
    "PrivacyBudget",
    "PipelineConfig",
    "certify_bounds",
    "compose",
    "exact_minimizer",
    "pure_to_gdp",
    "run_localized_asap",
    "__version__",
]
