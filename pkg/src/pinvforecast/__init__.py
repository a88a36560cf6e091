"""Pseudo-inverse forecasting of scalar time series from delay embeddings."""

__version__ = "0.1.0"

from .design import (
    DesignMatrix,
    MonomialBasis,
    build_design_matrix,
    count_terms,
    enumerate_monomials,
    evaluate_monomials,
    total_coefficients,
)
from .embedding import DelayMatrix, EmbeddingConfig, FNNResult, Series, delay_embed, fnn_dimension
from .errors import ConfigError, DataError, DimensionError, DomainError, ForecastError, NumericalError
from .forecast import ForecastConfig, ForecastResult, horizon_bound, mse, predict, rolling_mse
from .generators import MackeyGlassConfig, ecg_surrogate, mackey_glass, synthetic_polynomial_series
from .inference import (
    FisherDiagnostics,
    FittedModel,
    coefficient_covariance,
    empirical_fim,
    empirical_fim_gradient,
    empirical_fim_hessian_diag,
    fisher_diagnostics,
    fisher_information_matrix,
    fit_coefficients,
    log_density,
    pseudo_inverse,
)
from .ingest import SignalFile, load_series, write_result
