"""Principal-component linear discriminant analysis for latent factor models."""

from ._core import *  # noqa: F401,F403
from ._core import (
    PcldaError,
    fit,
    fit_crossfit,
    fit_multiclass,
    fit_multiclass_averaged,
    gen_params,
    load_model,
    population_summary,
    run_grid,
    sample_dataset,
    save_model,
    select_k,
)

__version__ = "0.1.0"
