"""Split-plot randomization inference: design-based estimators, least-squares
fits with cluster-robust covariances, randomization tests and a simulation
harness. The heavy lifting happens in the compiled ``_core`` module."""

from ._core import (
    Assignment,
    CapExceeded,
    Contrasts,
    Design,
    EffectEstimate,
    FrtResult,
    InvalidInput,
    MeanEstimate,
    NumericError,
    ObservedData,
    PotentialOutcomes,
    RegressionFit,
    SimConfig,
    SimRow,
    SimSummary,
    SplitPlotError,
    estimate_effects,
    estimate_means,
    fit,
    frt,
    hajek_ht_asymptotic_gap,
    load_dataset,
    observe,
    randomize,
    read_dataset_csv,
    run_simulation,
    select_rows,
    simulation_schemes,
    standard_contrasts,
    true_cov_ht,
    validate_assignment,
    vhat_ht_bias,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
