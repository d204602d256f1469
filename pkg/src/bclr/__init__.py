"""Bayesian changepoint detection via logistic regression (BCLR).

A changepoint is recast as a label switch in a logistic regression of
time-ordered features; Pólya-gamma augmentation gives a three-step Gibbs
sampler for the changepoint and the coefficients.  Image series are
embedded through cubical persistent homology first.
"""

from .core import (
    FeatureMatrix,
    GaussianPrior,
    GibbsConfig,
    IllConditionedPrecision,
    KappaPrior,
    NotStandardizedError,
    PosteriorSamples,
    is_standardized,
    log_kappa_weights,
    run_gibbs,
    sample_beta,
    sample_kappa,
    sample_omegas,
    standardize_columns,
)
from .cubical import PersistenceDiagram, gaussian_smooth, standardize_frame, sublevel_pd
from .embeddings import EmbeddingSpec, embed_image_series, embed_tabular_series, poly2
from .features import alps, f_stat, persistence_image, persistent_entropy
from .multi import MultiConfig, MultiResult, Partition, constrained_modes, initial_partition, multi_fit
from .posterior import (
    ChangepointPosterior,
    highest_mass_set,
    normalized_entropy,
    point_estimates,
    quantile_interval,
    snr_report,
)
from .rng import RngStream, make_stream, sample_pg

__version__ = "0.1.0"

__all__ = [
    "FeatureMatrix", "GaussianPrior", "GibbsConfig", "IllConditionedPrecision", "KappaPrior",
    "NotStandardizedError", "PosteriorSamples", "is_standardized", "log_kappa_weights", "run_gibbs",
    "sample_beta", "sample_kappa", "sample_omegas", "standardize_columns",
    "PersistenceDiagram", "gaussian_smooth", "standardize_frame", "sublevel_pd",
    "EmbeddingSpec", "embed_image_series", "embed_tabular_series", "poly2",
    "alps", "f_stat", "persistence_image", "persistent_entropy",
    "MultiConfig", "MultiResult", "Partition", "constrained_modes", "initial_partition", "multi_fit",
    "ChangepointPosterior", "highest_mass_set", "normalized_entropy", "point_estimates",
    "quantile_interval", "snr_report",
    "RngStream", "make_stream", "sample_pg",
]
