"""Effective non-random extreme learning machines for regression.

Hidden-layer weights are derived deterministically from the eigenbasis of
the exact erf wide-network Gram matrix instead of being sampled; output
weights come from either an orthogonal projection or forward stagewise
regression. A traditional random-weight baseline and a benchmark CLI are
included.
"""

from .core import (
    EnrModel,
    ErrorCurve,
    Preprocess,
    compute_hidden_weights,
    curvature_selection,
    default_max_neurons,
    error_curve,
    fit_approximated,
    fit_incremental,
    fit_preprocess,
    hidden_features,
    order_by_information,
    predict,
    predict_batch,
)
from .data import Dataset, load_csv, read_error_curve_csv, split, write_error_curve_csv
from .elm import ElmModel, ElmSweep, elm_error_sweep, fit_elm, fit_ols, fit_ridge, sample_weights
from .errors import (
    ConfigError,
    DataError,
    EigenSolveError,
    NumericalError,
    RankDeficiencyError,
    RankDeficiencyWarning,
    ZeroVarianceError,
)
from .kernel import KernelGram, erf_dual, input_kernel, mc_gram_estimate, nngp_gram
from .numerics import EigenPair, erf, erf_inv, row_space_projector_apply, sym_eig
from .pipeline import BenchmarkResult, MethodResult, run_benchmark
from .synthetic import SyntheticSpec, apply_noise, gen_inputs, gen_target_linear, gen_target_shallow, generate, get_spec, spec_table

__version__ = "0.1.0"

__all__ = [
    "BenchmarkResult",
    "ConfigError",
    "DataError",
    "Dataset",
    "EigenPair",
    "EigenSolveError",
    "ElmModel",
    "ElmSweep",
    "EnrModel",
    "ErrorCurve",
    "KernelGram",
    "MethodResult",
    "NumericalError",
    "Preprocess",
    "RankDeficiencyError",
    "RankDeficiencyWarning",
    "SyntheticSpec",
    "ZeroVarianceError",
    "apply_noise",
    "compute_hidden_weights",
    "curvature_selection",
    "default_max_neurons",
    "elm_error_sweep",
    "erf",
    "erf_dual",
    "erf_inv",
    "error_curve",
    "fit_approximated",
    "fit_elm",
    "fit_incremental",
    "fit_ols",
    "fit_preprocess",
    "fit_ridge",
    "gen_inputs",
    "gen_target_linear",
    "gen_target_shallow",
    "generate",
    "get_spec",
    "hidden_features",
    "input_kernel",
    "load_csv",
    "mc_gram_estimate",
    "nngp_gram",
    "order_by_information",
    "predict",
    "predict_batch",
    "read_error_curve_csv",
    "row_space_projector_apply",
    "run_benchmark",
    "sample_weights",
    "spec_table",
    "split",
    "sym_eig",
    "write_error_curve_csv",
]
