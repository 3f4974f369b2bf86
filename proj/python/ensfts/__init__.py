"""Embedded non-stationary fuzzy time series forecasting."""

from ._ensfts import (
    DegenerateEmbedding,
    Error,
    IngestError,
    InvalidInput,
    KpcaModel,
    LoadError,
    NsftsModel,
    NumericalFailure,
    PcaModel,
    center_kernel,
    compute_metrics,
    fit_kpca,
    fit_pca,
    generate_sensor_frame,
    generate_synthetic,
    grid_search,
    load_csv,
    load_model,
    persistence_forecast,
    rbf_kernel_matrix,
    save_model,
    skill_score,
    sliding_window_eval,
    sym_eigen,
)

__all__ = [
    "DegenerateEmbedding",
    "Error",
    "IngestError",
    "InvalidInput",
    "KpcaModel",
    "LoadError",
    "NsftsModel",
    "NumericalFailure",
    "PcaModel",
    "center_kernel",
    "compute_metrics",
    "fit_kpca",
    "fit_pca",
    "generate_sensor_frame",
    "generate_synthetic",
    "grid_search",
    "load_csv",
    "load_model",
    "persistence_forecast",
    "rbf_kernel_matrix",
    "save_model",
    "skill_score",
    "sliding_window_eval",
    "sym_eigen",
]
