"""Copula-coupled projected-gamma models for angles on the first quadrant.

The package simulates and fits joint distributions whose marginals are
projected gamma distributions on (0, pi/2) and whose dependence is a
Gaussian or Student-t copula, with two-stage Bayesian inference:
marginal parameters first, copula parameters conditional on them.
"""

from pgcopula.copula import (
    CopulaFamily,
    CopulaParams,
    CorrelationMatrix,
    copula_sample,
    gaussian_copula_log_density,
    t_copula_log_density,
)
from pgcopula.diagnostics import (
    PredictiveGrid,
    credible_interval,
    effective_sample_size,
    geweke_z,
    lpml,
    predictive_grid,
    summarize_chain,
)
from pgcopula.errors import (
    DomainError,
    NotPositiveDefiniteError,
    NumericalError,
    ValidationError,
)
from pgcopula.inference import (
    Chain,
    GammaPrior,
    McmcConfig,
    PriorSpec,
    log_prior_copula,
    log_prior_marginals,
    run_two_stage,
    stage1_target,
    stage2_target,
)
from pgcopula.joint_model import (
    CDF_CLAMP,
    Dataset,
    ModelParams,
    clamp_probabilities,
    joint_log_pdf,
    log_likelihood,
    simulate_dataset,
)
from pgcopula.projected_gamma import (
    HALF_PI,
    MarginalParams,
    pg_cdf,
    pg_log_pdf,
    pg_quantile,
    pg_sample,
)

__version__ = "0.1.0"

__all__ = [
    "CDF_CLAMP",
    "Chain",
    "CopulaFamily",
    "CopulaParams",
    "CorrelationMatrix",
    "Dataset",
    "DomainError",
    "GammaPrior",
    "HALF_PI",
    "MarginalParams",
    "McmcConfig",
    "ModelParams",
    "NotPositiveDefiniteError",
    "NumericalError",
    "PredictiveGrid",
    "PriorSpec",
    "ValidationError",
    "clamp_probabilities",
    "copula_sample",
    "credible_interval",
    "effective_sample_size",
    "gaussian_copula_log_density",
    "geweke_z",
    "joint_log_pdf",
    "log_likelihood",
    "log_prior_copula",
    "log_prior_marginals",
    "lpml",
    "pg_cdf",
    "pg_log_pdf",
    "pg_quantile",
    "pg_sample",
    "predictive_grid",
    "run_two_stage",
    "simulate_dataset",
    "stage1_target",
    "stage2_target",
    "summarize_chain",
    "t_copula_log_density",
    "__version__",
]
