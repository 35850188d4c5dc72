"""Python access to the riscest simulator, estimators and denoiser."""

from ._riscest import (
    ConfigError,
    FormatError,
    ShapeError,
    bessel_j0,
    closed_form_cost,
    complexity,
    config,
    correlation_matrices,
    denoise,
    dft_schedule,
    direct,
    evaluate,
    generate,
    load_dataset,
    ls_estimate,
    nmse,
    psd_sqrt,
    sample,
    sweep,
    to_db,
    train,
)

__all__ = [
    "ConfigError",
    "FormatError",
    "ShapeError",
    "bessel_j0",
    "closed_form_cost",
    "complexity",
    "config",
    "correlation_matrices",
    "denoise",
    "dft_schedule",
    "direct",
    "evaluate",
    "generate",
    "load_dataset",
    "ls_estimate",
    "nmse",
    "nmse_db",
    "psd_sqrt",
    "sample",
    "sweep",
    "to_db",
    "train",
]


def nmse_db(estimate, truth):
    """NMSE in dB with the library's -300 dB floor."""
    return to_db(nmse(estimate, truth))
