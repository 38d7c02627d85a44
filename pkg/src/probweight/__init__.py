"""Probability weighting as a consequence of estimating densities from finite data."""
__version__ = "0.1.0"

from .dist import DistributionSpec, Family, cdf, pdf, quantile
from .errors import DegenerateInputError, DomainError, InputError, ProbWeightError, ResourceError
from .estimate import (BinnedDensity, DensityEstimate, analytic_cdf_map,
                       analytic_decision_weight_density, decision_weights, density_estimate)
from .fit import Dataset, FitFailure, FitResult, LMOptions, compare_fits, fit_model, lm_minimize
from .montecarlo import GbmConfig, SimConfig, gbm_simulate, simulate_dm
from .weightmap import (CdfMapCurve, ModelKind, WeightingModel, gaussian_map, gaussian_pdf_map,
                        lattimore_weight, model_cdf_map, numeric_cdf_map, t_map, tk_weight)

__all__ = [
    "DistributionSpec", "Family", "cdf", "pdf", "quantile",
    "ProbWeightError", "DomainError", "DegenerateInputError", "InputError", "ResourceError",
    "BinnedDensity", "DensityEstimate", "density_estimate", "decision_weights",
    "analytic_decision_weight_density", "analytic_cdf_map",
    "Dataset", "FitFailure", "FitResult", "LMOptions", "fit_model", "compare_fits", "lm_minimize",
    "SimConfig", "GbmConfig", "simulate_dm", "gbm_simulate",
    "CdfMapCurve", "ModelKind", "WeightingModel", "tk_weight", "lattimore_weight",
    "gaussian_map", "t_map", "gaussian_pdf_map", "numeric_cdf_map", "model_cdf_map",
]
